#include "stam/runner.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "stam/checks.hpp"
#include "stam/mlp.hpp"
#include "stam/problems.hpp"
#include "stam/trace.hpp"

namespace stam {

namespace {

// Stream ids per role; run streams must match across the algorithms of one
// comparison so each sees the same batch sequence.
constexpr std::uint64_t kDataStream = 100;
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kInitStream = 102;
constexpr std::uint64_t kRunStream = 200;

Vec draw_init(const InitConfig& init, int dim, std::uint64_t seed) {
  Vec y0 = Vec::Zero(dim);
  if (init.kind == "normal") {
    RngStream rng(seed, kInitStream);
    for (int j = 0; j < dim; ++j) y0[j] = init.scale * rng.normal();
  }
  return y0;
}

}  // namespace

BuiltProblem build_problem(const ProblemConfig& pc, const InitConfig& init,
                           std::uint64_t seed) {
  BuiltProblem built;
  RngStream data_rng(seed, kDataStream);

  if (pc.kind == "least_squares") {
    built.problem = make_least_squares(pc.N, pc.d, pc.lambda, pc.noise, data_rng,
                                       {pc.quantized, pc.n_layers});
  } else if (pc.kind == "logistic") {
    built.problem = make_logistic(pc.N, pc.d, pc.lambda, data_rng,
                                  {pc.quantized, pc.n_layers});
  } else if (pc.kind == "scalar_toy") {
    built.problem = make_scalar_toy(pc.target, pc.lambda);
  } else if (pc.kind == "mlp") {
    Dataset data;
    int n_classes = 2;
    if (pc.dataset_kind == "blobs") {
      data = make_blobs(pc.n_per_class, pc.n_classes, pc.dim, pc.separation, data_rng);
      n_classes = pc.n_classes;
    } else {
      data = load_csv_dataset(pc.csv_path, pc.label_column);
      if (!data.is_classification)
        throw ConfigError("dataset '" + pc.csv_path + "' has non-integer labels");
      n_classes = data.labels.size() ? data.labels.maxCoeff() + 1 : 0;
      if (n_classes < 2) throw ConfigError("dataset needs at least two classes");
    }
    RngStream split_rng(seed, kSplitStream);
    SplitDataset split = split_dataset(data, pc.train_fraction, split_rng);
    MlpSpec spec;
    spec.input_dim = data.dim();
    spec.hidden = pc.hidden;
    spec.n_classes = n_classes;
    spec.loss = pc.loss == "squared_error" ? MlpLoss::kSquaredError
                                           : MlpLoss::kSoftmaxCrossEntropy;
    built.problem = make_mlp_problem(spec, split.train, split.test,
                                     {pc.lambda, pc.l1_estimate, pc.quantized});
    built.train_n = split.train.n();
    built.test_n = split.test.n();
  } else {
    throw ConfigError("unknown problem kind '" + pc.kind + "'");
  }

  built.y0 = draw_init(init, built.problem.dim_y, seed);
  return built;
}

std::string resolve_output_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::path(path).is_absolute()) return path;
  const char* dir = std::getenv("STAM_OUTPUT_DIR");
  if (dir != nullptr && dir[0] != '\0') return (fs::path(dir) / path).string();
  return path;
}

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string summary_path_for(const std::string& trace_path) {
  if (trace_path.size() > 4 && trace_path.substr(trace_path.size() - 4) == ".csv")
    return trace_path.substr(0, trace_path.size() - 4) + ".summary.json";
  return trace_path + ".summary.json";
}

void put_if_finite(ordered_json& node, const char* key, double v) {
  if (std::isfinite(v)) node[key] = v;
}

int run_once(const RunConfigFile& rc, const std::string& config_path,
             const std::string& config_text) {
  const BuiltProblem built = build_problem(rc.common.problem, rc.common.init, rc.common.seed);
  const long T = resolve_T(rc.common, built.problem.n_components);
  const SolverParams params = solver_params_for(rc.common, rc.algo, T);
  const Algo algo = algo_from_name(rc.algo.name);

  std::string trace_path =
      rc.output_path.empty() ? rc.algo.name + "_trace.csv" : rc.output_path;
  trace_path = resolve_output_path(trace_path);
  ensure_parent_dir(trace_path);

  std::string status = "ok";
  std::string error_text;
  RunResult result;
  const auto t_start = std::chrono::steady_clock::now();
  {
    CsvTraceWriter writer(trace_path);
    try {
      result = run_solver(built.problem, algo, params, built.y0,
                          RngStream(rc.common.seed, kRunStream), &writer);
    } catch (const NumericError& e) {
      status = "diverged";
      error_text = e.what();
      // e.iteration names the step that produced the non-finite iterate.
      if (e.iteration > 0) result.iterations = e.iteration - 1;
    }
  }
  const auto t_end = std::chrono::steady_clock::now();
  const double wall_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t_end - t_start)
          .count();

  ordered_json summary;
  summary["schema_version"] = 1;
  summary["config_path"] = config_path;
  summary["config_digest"] = digest_hex(config_text);
  summary["seed"] = rc.common.seed;
  summary["algo"] = rc.algo.name;
  summary["problem"] = built.problem.name;
  summary["T"] = T;
  summary["iterations"] = result.iterations;
  summary["batch_b"] = rc.common.batch_b;
  ordered_json best;
  put_if_finite(best, "combined", result.best_combined);
  put_if_finite(best, "train_accuracy", result.best_train_accuracy);
  put_if_finite(best, "test_accuracy", result.best_test_accuracy);
  summary["best"] = best;
  if (status == "ok") {
    ordered_json fin;
    fin["y_norm"] = result.state.y.norm();
    fin["x_norm"] = result.state.x.norm();
    fin["u_norm"] = result.state.u.norm();
    fin["z_norm"] = result.state.z.norm();
    summary["final"] = fin;
  }
  summary["counters"] = {{"grad_draws", result.counters.grad_draws},
                         {"prox_calls", result.counters.prox_calls}};
  if (built.problem.dataset_backed)
    summary["split"] = {{"train_n", built.train_n}, {"test_n", built.test_n}};
  if (algo == Algo::kStam) summary["k1_satisfied_at_start"] = result.k1_satisfied_at_start;
  summary["wall_time_ms"] = wall_ms;
  summary["status"] = status;
  if (!error_text.empty()) summary["error"] = error_text;
  write_text_file(summary_path_for(trace_path), summary.dump(2) + "\n");

  if (status != "ok") {
    std::fprintf(stderr, "numeric divergence: %s (partial trace in %s)\n", error_text.c_str(),
                 trace_path.c_str());
    return 3;
  }
  std::printf("%s on %s: T=%ld best_combined=%s trace=%s\n", rc.algo.name.c_str(),
              built.problem.name.c_str(), T, format_double(result.best_combined).c_str(),
              trace_path.c_str());
  return 0;
}

struct CompareRow {
  std::string label;
  double best_train = kNaN;
  double best_test = kNaN;
  double best_combined = kNaN;
  std::string status = "ok";
};

std::string acc_cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

int cmd_run(const std::string& config_path) {
  try {
    const std::string text = read_text_file(config_path);
    const RunConfigFile rc = parse_run_config(text, config_path);
    return run_once(rc, config_path, text);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  }
}

int cmd_compare(const std::string& config_path) {
  try {
    const std::string text = read_text_file(config_path);
    const CompareConfigFile cc = parse_compare_config(text, config_path);
    const BuiltProblem built = build_problem(cc.common.problem, cc.common.init, cc.common.seed);
    const long T = resolve_T(cc.common, built.problem.n_components);

    const std::string out_dir =
        resolve_output_path(cc.output_dir.empty() ? std::string(".") : cc.output_dir);
    fs::create_directories(out_dir);

    // Duplicate algorithm names get an index suffix so traces stay separate.
    std::vector<std::string> labels;
    for (size_t k = 0; k < cc.algos.size(); ++k) {
      std::string label = cc.algos[k].name;
      int repeats = 0;
      for (size_t j = 0; j < k; ++j)
        if (cc.algos[j].name == cc.algos[k].name) ++repeats;
      if (repeats > 0) label += "_" + std::to_string(repeats + 1);
      labels.push_back(label);
    }

    std::vector<CompareRow> rows;
    bool any_diverged = false;
    for (size_t k = 0; k < cc.algos.size(); ++k) {
      const AlgoConfig& ac = cc.algos[k];
      const SolverParams params = solver_params_for(cc.common, ac, T);
      const std::string trace_path = (fs::path(out_dir) / (labels[k] + "_trace.csv")).string();
      CompareRow row;
      row.label = labels[k];
      CsvTraceWriter writer(trace_path);
      try {
        // Every sub-run draws from the same stream id: identical batch
        // sequences make the comparison a controlled experiment.
        const RunResult r = run_solver(built.problem, algo_from_name(ac.name), params,
                                       built.y0, RngStream(cc.common.seed, kRunStream), &writer);
        row.best_train = r.best_train_accuracy;
        row.best_test = r.best_test_accuracy;
        row.best_combined = r.best_combined;
      } catch (const NumericError& e) {
        row.status = "diverged";
        any_diverged = true;
        std::fprintf(stderr, "%s: numeric divergence: %s\n", labels[k].c_str(), e.what());
      }
      rows.push_back(row);
    }

    std::string csv = "algo,best_train_acc,best_test_acc,best_combined,status\n";
    for (const auto& r : rows) {
      csv += r.label + "," + acc_cell(r.best_train) + "," + acc_cell(r.best_test) + "," +
             format_double(r.best_combined) + "," + r.status + "\n";
    }
    const std::string table_path = (fs::path(out_dir) / "table.csv").string();
    write_text_file(table_path, csv);

    std::printf("%-10s %15s %15s %14s %10s\n", "algo", "best_train_acc", "best_test_acc",
                "best_combined", "status");
    for (const auto& r : rows) {
      std::printf("%-10s %15s %15s %14.6g %10s\n", r.label.c_str(), acc_cell(r.best_train).c_str(),
                  acc_cell(r.best_test).c_str(), r.best_combined, r.status.c_str());
    }
    std::printf("table: %s\n", table_path.c_str());
    return any_diverged ? 3 : 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
}

int cmd_verify(const std::string& suite) {
  std::vector<CheckResult> results;
  if (suite == "projection") {
    results = check_projection();
  } else if (suite == "unbiasedness") {
    results = check_unbiasedness();
  } else if (suite == "es") {
    results = check_es();
  } else if (suite == "threshold") {
    results = check_threshold();
  } else if (suite == "gradients") {
    results = check_gradients();
  } else {
    std::fprintf(stderr,
                 "unknown suite '%s' (projection, unbiasedness, es, threshold, gradients)\n",
                 suite.c_str());
    return 2;
  }
  return report_checks(results) ? 0 : 1;
}

}  // namespace stam
