#pragma once

#include <cstdint>
#include <string>

#include "stam/config.hpp"
#include "stam/problem.hpp"

namespace stam {

struct BuiltProblem {
  ProblemInstance problem;
  Vec y0;
  int train_n = 0;  // dataset-backed problems only
  int test_n = 0;
};

// Instantiates the configured problem and start point. Data generation, the
// train/test split, and the init draw use fixed rng stream ids derived from
// the seed, so every algorithm compared under one config sees identical data.
BuiltProblem build_problem(const ProblemConfig& pc, const InitConfig& init,
                           std::uint64_t seed);

// Front-end entry points. Each prints its own error messages and returns the
// process exit code: 0 success, 2 configuration problem, 3 numeric
// divergence, 1 anything else.
int cmd_run(const std::string& config_path);
int cmd_compare(const std::string& config_path);
int cmd_verify(const std::string& suite);

// Relative paths land under $STAM_OUTPUT_DIR when that is set and nonempty.
std::string resolve_output_path(const std::string& path);

}  // namespace stam
