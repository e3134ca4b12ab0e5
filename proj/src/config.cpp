#include "stam/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace stam {

namespace {

using json = nlohmann::json;

// Line/column of a byte offset in the original text, 1-based.
std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ConfigError(source + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& source, const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      fail(source, "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

double need_number(const json& node, const std::string& source, const std::string& path) {
  if (!node.is_number()) fail(source, "'" + path + "' must be a number");
  return node.get<double>();
}

long need_integer(const json& node, const std::string& source, const std::string& path) {
  if (!node.is_number_integer()) fail(source, "'" + path + "' must be an integer");
  return node.get<long>();
}

std::string need_string(const json& node, const std::string& source, const std::string& path) {
  if (!node.is_string()) fail(source, "'" + path + "' must be a string");
  return node.get<std::string>();
}

bool need_bool(const json& node, const std::string& source, const std::string& path) {
  if (!node.is_boolean()) fail(source, "'" + path + "' must be a boolean");
  return node.get<bool>();
}

// A schedule is a bare number (constant) or an object selecting a kind.
ParamSchedule parse_schedule(const json& node, const std::string& source,
                             const std::string& path) {
  if (node.is_number()) return ParamSchedule::constant(node.get<double>());
  if (!node.is_object()) fail(source, "'" + path + "' must be a number or an object");
  reject_unknown(node,
                 {"kind", "base", "decay", "floor", "post_value", "switch_epoch", "period"},
                 source, path);
  const std::string kind = need_string(node.at("kind"), source, path + ".kind");
  auto num = [&](const char* key, std::optional<double> fallback = {}) {
    if (!node.contains(key)) {
      if (fallback) return *fallback;
      fail(source, "'" + path + "' schedule kind '" + kind + "' needs '" + key + "'");
    }
    return need_number(node.at(key), source, path + "." + key);
  };
  auto integer = [&](const char* key, std::optional<int> fallback = {}) {
    if (!node.contains(key)) {
      if (fallback) return *fallback;
      fail(source, "'" + path + "' schedule kind '" + kind + "' needs '" + key + "'");
    }
    return static_cast<int>(need_integer(node.at(key), source, path + "." + key));
  };
  if (kind == "constant") return ParamSchedule::constant(num("base"));
  if (kind == "step_decay")
    return ParamSchedule::step_decay(num("base"), num("decay"), integer("switch_epoch", 0),
                                     integer("period", 1), num("floor", 0.0));
  if (kind == "multiplicative_floor")
    return ParamSchedule::multiplicative_floor(num("base"), num("decay"), num("floor"),
                                               integer("switch_epoch", 0));
  if (kind == "phase_switch")
    return ParamSchedule::phase_switch(num("base"), integer("switch_epoch"), num("post_value"),
                                       num("decay", 1.0), num("floor", 0.0));
  fail(source, "'" + path + ".kind' unknown schedule kind '" + kind + "'");
}

ProblemConfig parse_problem(const json& node, const std::string& source) {
  if (!node.is_object()) fail(source, "'problem' must be an object");
  ProblemConfig pc;
  if (!node.contains("kind")) fail(source, "'problem.kind' is required");
  pc.kind = need_string(node.at("kind"), source, "problem.kind");

  if (pc.kind == "least_squares" || pc.kind == "logistic") {
    std::set<std::string> allowed = {"kind", "N", "d", "lambda", "quantized", "n_layers"};
    if (pc.kind == "least_squares") allowed.insert("noise");
    reject_unknown(node, allowed, source, "problem");
    if (node.contains("N"))
      pc.N = static_cast<int>(need_integer(node.at("N"), source, "problem.N"));
    if (node.contains("d"))
      pc.d = static_cast<int>(need_integer(node.at("d"), source, "problem.d"));
    if (node.contains("lambda"))
      pc.lambda = need_number(node.at("lambda"), source, "problem.lambda");
    if (node.contains("noise"))
      pc.noise = need_number(node.at("noise"), source, "problem.noise");
    if (node.contains("quantized"))
      pc.quantized = need_bool(node.at("quantized"), source, "problem.quantized");
    if (node.contains("n_layers"))
      pc.n_layers = static_cast<int>(need_integer(node.at("n_layers"), source, "problem.n_layers"));
    return pc;
  }

  if (pc.kind == "scalar_toy") {
    reject_unknown(node, {"kind", "target", "lambda"}, source, "problem");
    if (node.contains("target"))
      pc.target = need_number(node.at("target"), source, "problem.target");
    if (node.contains("lambda"))
      pc.lambda = need_number(node.at("lambda"), source, "problem.lambda");
    return pc;
  }

  if (pc.kind == "mlp") {
    reject_unknown(node,
                   {"kind", "hidden", "loss", "lambda", "l1_estimate", "quantized",
                    "train_fraction", "dataset"},
                   source, "problem");
    if (!node.contains("hidden")) fail(source, "'problem.hidden' is required for mlp");
    if (!node.at("hidden").is_array()) fail(source, "'problem.hidden' must be an array");
    for (const auto& h : node.at("hidden"))
      pc.hidden.push_back(static_cast<int>(need_integer(h, source, "problem.hidden[]")));
    if (node.contains("loss")) {
      pc.loss = need_string(node.at("loss"), source, "problem.loss");
      if (pc.loss != "softmax_cross_entropy" && pc.loss != "squared_error")
        fail(source, "'problem.loss' must be softmax_cross_entropy or squared_error");
    }
    if (node.contains("lambda"))
      pc.lambda = need_number(node.at("lambda"), source, "problem.lambda");
    if (node.contains("l1_estimate"))
      pc.l1_estimate = need_number(node.at("l1_estimate"), source, "problem.l1_estimate");
    pc.quantized = true;
    if (node.contains("quantized"))
      pc.quantized = need_bool(node.at("quantized"), source, "problem.quantized");
    if (node.contains("train_fraction"))
      pc.train_fraction = need_number(node.at("train_fraction"), source, "problem.train_fraction");

    if (!node.contains("dataset")) fail(source, "'problem.dataset' is required for mlp");
    const json& ds = node.at("dataset");
    if (!ds.is_object()) fail(source, "'problem.dataset' must be an object");
    if (!ds.contains("kind")) fail(source, "'problem.dataset.kind' is required");
    pc.dataset_kind = need_string(ds.at("kind"), source, "problem.dataset.kind");
    if (pc.dataset_kind == "blobs") {
      reject_unknown(ds, {"kind", "n_per_class", "n_classes", "dim", "separation"}, source,
                     "problem.dataset");
      if (ds.contains("n_per_class"))
        pc.n_per_class =
            static_cast<int>(need_integer(ds.at("n_per_class"), source, "problem.dataset.n_per_class"));
      if (ds.contains("n_classes"))
        pc.n_classes =
            static_cast<int>(need_integer(ds.at("n_classes"), source, "problem.dataset.n_classes"));
      if (ds.contains("dim"))
        pc.dim = static_cast<int>(need_integer(ds.at("dim"), source, "problem.dataset.dim"));
      if (ds.contains("separation"))
        pc.separation = need_number(ds.at("separation"), source, "problem.dataset.separation");
    } else if (pc.dataset_kind == "csv") {
      reject_unknown(ds, {"kind", "path", "label_column"}, source, "problem.dataset");
      if (!ds.contains("path")) fail(source, "'problem.dataset.path' is required");
      pc.csv_path = need_string(ds.at("path"), source, "problem.dataset.path");
      if (!ds.contains("label_column"))
        fail(source, "'problem.dataset.label_column' is required");
      pc.label_column = need_string(ds.at("label_column"), source, "problem.dataset.label_column");
    } else {
      fail(source, "'problem.dataset.kind' must be blobs or csv");
    }
    return pc;
  }

  fail(source, "'problem.kind' must be least_squares, logistic, mlp, or scalar_toy");
}

AlgoConfig parse_algo(const json& node, const std::string& source, const std::string& path) {
  if (!node.is_object()) fail(source, "'" + path + "' must be an object");
  reject_unknown(node, {"name", "gamma", "beta", "lambda", "weight_decay", "br"}, source, path);
  AlgoConfig ac;
  if (!node.contains("name")) fail(source, "'" + path + ".name' is required");
  ac.name = need_string(node.at("name"), source, path + ".name");
  try {
    algo_from_name(ac.name);
  } catch (const std::invalid_argument& e) {
    fail(source, "'" + path + ".name': " + e.what());
  }
  if (!node.contains("gamma")) fail(source, "'" + path + ".gamma' is required");
  ac.gamma = parse_schedule(node.at("gamma"), source, path + ".gamma");
  if (node.contains("beta")) ac.beta = parse_schedule(node.at("beta"), source, path + ".beta");
  if (node.contains("lambda"))
    ac.lambda = parse_schedule(node.at("lambda"), source, path + ".lambda");
  if (node.contains("weight_decay"))
    ac.weight_decay = need_number(node.at("weight_decay"), source, path + ".weight_decay");
  if (node.contains("br")) {
    const json& br = node.at("br");
    if (!br.is_object()) fail(source, "'" + path + ".br' must be an object");
    reject_unknown(br, {"lambda0", "rho", "phase_switch_K"}, source, path + ".br");
    if (br.contains("lambda0"))
      ac.br_lambda0 = need_number(br.at("lambda0"), source, path + ".br.lambda0");
    if (br.contains("rho")) ac.br_rho = need_number(br.at("rho"), source, path + ".br.rho");
    if (br.contains("phase_switch_K"))
      ac.br_phase_switch_K = need_integer(br.at("phase_switch_K"), source, path + ".br.phase_switch_K");
  }
  return ac;
}

json parse_document(const std::string& text, const std::string& source) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          e.what(),
                      line, col);
  }
}

RunSettings parse_common(const json& doc, const std::string& source) {
  RunSettings rs;
  if (!doc.contains("schema_version")) fail(source, "'schema_version' is required");
  if (need_integer(doc.at("schema_version"), source, "schema_version") != 1)
    fail(source, "unsupported schema_version (this build reads version 1)");
  if (!doc.contains("seed")) fail(source, "'seed' is required");
  const long seed = need_integer(doc.at("seed"), source, "seed");
  if (seed < 0) fail(source, "'seed' must be >= 0");
  rs.seed = static_cast<std::uint64_t>(seed);
  if (!doc.contains("problem")) fail(source, "'problem' is required");
  rs.problem = parse_problem(doc.at("problem"), source);

  const bool has_T = doc.contains("T");
  const bool has_epochs = doc.contains("epochs");
  if (has_T == has_epochs) fail(source, "exactly one of 'T' or 'epochs' is required");
  if (has_T) {
    rs.T = need_integer(doc.at("T"), source, "T");
    if (rs.T < 0) fail(source, "'T' must be >= 0");
  } else {
    rs.epochs = need_integer(doc.at("epochs"), source, "epochs");
    if (rs.epochs < 0) fail(source, "'epochs' must be >= 0");
  }

  if (doc.contains("batch_b")) {
    rs.batch_b = static_cast<int>(need_integer(doc.at("batch_b"), source, "batch_b"));
    if (rs.batch_b < 0) fail(source, "'batch_b' must be >= 0");
  }
  if (doc.contains("sampling")) {
    rs.sampling = need_string(doc.at("sampling"), source, "sampling");
    sampling_from_name(rs.sampling);  // validates
  }
  if (doc.contains("epoch_mode")) {
    rs.epoch_mode = need_string(doc.at("epoch_mode"), source, "epoch_mode");
    epoch_mode_from_name(rs.epoch_mode);
  }
  if (doc.contains("log_every")) {
    rs.log_every = need_integer(doc.at("log_every"), source, "log_every");
    if (rs.log_every < 1) fail(source, "'log_every' must be >= 1");
  }
  if (doc.contains("init")) {
    const json& init = doc.at("init");
    if (!init.is_object()) fail(source, "'init' must be an object");
    reject_unknown(init, {"kind", "scale"}, source, "init");
    if (init.contains("kind")) {
      rs.init.kind = need_string(init.at("kind"), source, "init.kind");
      if (rs.init.kind != "zeros" && rs.init.kind != "normal")
        fail(source, "'init.kind' must be zeros or normal");
    }
    if (init.contains("scale"))
      rs.init.scale = need_number(init.at("scale"), source, "init.scale");
  }
  return rs;
}

const std::set<std::string> kCommonKeys = {
    "schema_version", "seed", "problem", "T",         "epochs", "batch_b",
    "sampling",       "epoch_mode",      "log_every", "init"};

}  // namespace

RunConfigFile parse_run_config(const std::string& text, const std::string& source_name) {
  const json doc = parse_document(text, source_name);
  if (!doc.is_object()) fail(source_name, "top level must be an object");
  std::set<std::string> allowed = kCommonKeys;
  allowed.insert("algo");
  allowed.insert("output_path");
  reject_unknown(doc, allowed, source_name, "");

  RunConfigFile rc;
  rc.common = parse_common(doc, source_name);
  if (!doc.contains("algo")) fail(source_name, "'algo' is required");
  rc.algo = parse_algo(doc.at("algo"), source_name, "algo");
  if (doc.contains("output_path"))
    rc.output_path = need_string(doc.at("output_path"), source_name, "output_path");
  return rc;
}

CompareConfigFile parse_compare_config(const std::string& text, const std::string& source_name) {
  const json doc = parse_document(text, source_name);
  if (!doc.is_object()) fail(source_name, "top level must be an object");
  std::set<std::string> allowed = kCommonKeys;
  allowed.insert("algos");
  allowed.insert("output_dir");
  reject_unknown(doc, allowed, source_name, "");

  CompareConfigFile cc;
  cc.common = parse_common(doc, source_name);
  if (!doc.contains("algos")) fail(source_name, "'algos' is required");
  if (!doc.at("algos").is_array() || doc.at("algos").empty())
    fail(source_name, "'algos' must be a nonempty array");
  int idx = 0;
  for (const auto& a : doc.at("algos"))
    cc.algos.push_back(parse_algo(a, source_name, "algos[" + std::to_string(idx++) + "]"));
  if (doc.contains("output_dir"))
    cc.output_dir = need_string(doc.at("output_dir"), source_name, "output_dir");
  return cc;
}

SamplingMode sampling_from_name(const std::string& name) {
  if (name == "b_nice") return SamplingMode::kBNice;
  if (name == "epoch_shuffle") return SamplingMode::kEpochShuffle;
  throw ConfigError("unknown sampling mode '" + name + "' (b_nice or epoch_shuffle)");
}

EpochMode epoch_mode_from_name(const std::string& name) {
  if (name == "auto") return EpochMode::kAuto;
  if (name == "iteration") return EpochMode::kIteration;
  if (name == "dataset_pass") return EpochMode::kDatasetPass;
  throw ConfigError("unknown epoch_mode '" + name + "' (auto, iteration, dataset_pass)");
}

SolverParams solver_params_for(const RunSettings& common, const AlgoConfig& algo, long T) {
  SolverParams sp;
  sp.gamma = algo.gamma;
  sp.beta = algo.beta;
  sp.lambda = algo.lambda;
  sp.weight_decay = algo.weight_decay;
  sp.br.lambda0 = algo.br_lambda0;
  sp.br.rho = algo.br_rho;
  sp.br.phase_switch_K = algo.br_phase_switch_K;
  sp.br.gamma = algo.gamma;
  sp.T = T;
  sp.batch_b = common.batch_b;
  sp.sampling = sampling_from_name(common.sampling);
  sp.epoch_mode = epoch_mode_from_name(common.epoch_mode);
  sp.log_every = common.log_every;
  return sp;
}

long resolve_T(const RunSettings& common, int n_components) {
  if (common.T >= 0) return common.T;
  const int b = common.batch_b == 0 ? n_components : std::min(common.batch_b, n_components);
  const long per_epoch = (n_components + b - 1) / b;
  return common.epochs * per_epoch;
}

}  // namespace stam
