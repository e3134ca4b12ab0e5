#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stam/solvers.hpp"

namespace stam {

// Parsed form of the `problem` block. One kind is active; the other fields
// keep their defaults and are ignored.
struct ProblemConfig {
  std::string kind;  // least_squares | logistic | mlp | scalar_toy

  // least_squares / logistic
  int N = 8;
  int d = 4;
  double noise = 0.0;
  bool quantized = false;
  int n_layers = 1;

  // shared coupling weight
  double lambda = 1.0;

  // scalar_toy
  double target = 4.0;

  // mlp
  std::vector<int> hidden;
  std::string loss = "softmax_cross_entropy";  // | squared_error
  double l1_estimate = 1.0;
  double train_fraction = 0.8;
  std::string dataset_kind;  // blobs | csv
  int n_per_class = 100;
  int n_classes = 2;
  int dim = 2;
  double separation = 8.0;
  std::string csv_path;
  std::string label_column;
};

// One algorithm section: name plus its schedules and baseline knobs.
struct AlgoConfig {
  std::string name = "stam";
  ParamSchedule gamma = ParamSchedule::constant(0.1);
  ParamSchedule beta = ParamSchedule::constant(1.0);
  std::optional<ParamSchedule> lambda;
  double weight_decay = 0.0;
  double br_lambda0 = 1.0;
  double br_rho = 1.02;
  long br_phase_switch_K = 0;
};

struct InitConfig {
  std::string kind = "zeros";  // zeros | normal
  double scale = 1.0;
};

// Settings shared by single runs and comparisons. Exactly one of T or epochs
// is set; epochs converts to iterations once the dataset size is known.
struct RunSettings {
  std::uint64_t seed = 0;
  ProblemConfig problem;
  long T = -1;
  long epochs = -1;
  int batch_b = 0;  // 0 = full batch
  std::string sampling = "b_nice";
  std::string epoch_mode = "auto";
  long log_every = 1;
  InitConfig init;
};

struct RunConfigFile {
  RunSettings common;
  AlgoConfig algo;
  std::string output_path;  // empty derives <algo>_trace.csv
};

struct CompareConfigFile {
  RunSettings common;
  std::vector<AlgoConfig> algos;
  std::string output_dir;  // empty means current directory
};

// Parses config text (a JSON document; // and /* */ comments allowed).
// schema_version must equal 1 and unknown keys anywhere are rejected. Throws
// ConfigError carrying line/column for syntax errors and the offending key
// path otherwise. source_name only decorates messages.
RunConfigFile parse_run_config(const std::string& text, const std::string& source_name);
CompareConfigFile parse_compare_config(const std::string& text, const std::string& source_name);

SamplingMode sampling_from_name(const std::string& name);
EpochMode epoch_mode_from_name(const std::string& name);

// SolverParams for one algorithm under shared settings; T must already be
// resolved (resolve_T below).
SolverParams solver_params_for(const RunSettings& common, const AlgoConfig& algo, long T);

// T as configured, or epochs * ceil(N / b) when epochs was given instead.
long resolve_T(const RunSettings& common, int n_components);

}  // namespace stam
