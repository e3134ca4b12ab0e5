#pragma once

#include <string>
#include <vector>

namespace stam {

// One verification check: a measured worst-case deviation against its
// allowed bound. For sign/count style checks deviation is the number of
// offending cases and bound is 0.
struct CheckResult {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double bound = 0.0;
  std::string detail;
};

// Closed-form projection vs exhaustive sign-pattern minimum, layer lengths
// 1..12, 1000 seeded vectors each.
std::vector<CheckResult> check_projection();

// Mean of the subset estimator over all C(N,b) subsets vs the full gradient,
// and exact sampling-weight moments, for all N <= 8, all b.
std::vector<CheckResult> check_unbiasedness();

// Second-moment bound with finite-sum constants on a strongly coupled
// least-squares instance (exact subset enumeration), plus the halved-A
// falsification control and the trivial full-batch case.
std::vector<CheckResult> check_es();

// Step-size threshold: K1 sign flips around gamma_max for random profiles,
// agreement with a bisection root for the worked profile, and consistency of
// the satisfied flag.
std::vector<CheckResult> check_threshold();

// Finite-difference validation of every analytic gradient, plus the
// per-component bound ||grad G_i||^2 <= 2 L1_i (G_i - Gi_inf).
std::vector<CheckResult> check_gradients();

// Prints one line per result; returns true iff all pass.
bool report_checks(const std::vector<CheckResult>& results);

}  // namespace stam
