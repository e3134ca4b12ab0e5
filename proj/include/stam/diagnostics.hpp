#pragma once

#include <utility>
#include <vector>

#include "stam/problem.hpp"
#include "stam/rng.hpp"
#include "stam/sampling.hpp"

namespace stam {

// Constants of the second-moment bound
//   E||grad~G(y) + grad_y H(x,y)||^2 <= 2A (G(y) + H(x,y) - GH_inf) + C.
// Source records how they were obtained: from the b-nice finite-sum bound
// (A = (4 max_i L1_i E[v_i^2] + L3*)/2, C = 2A delta_inf), from generic
// (A0, B0, C0) data (A = max(2A0 + 2B0 L1, 2L3*), C = 2A gap + 2C0), or
// declared by the caller.
struct EsConstants {
  enum class Source { kFiniteSum, kGeneric, kDeclared };

  double A0 = 0.0, B0 = 0.0, C0 = 0.0;
  double A = 0.0;
  double C = 0.0;
  double delta_inf = 0.0;
  int N = 0;
  int b = 0;
  Source source = Source::kDeclared;
};

// Finite-sum route (requires per-component L1 bounds and infima).
EsConstants es_constants_finite_sum(const ProblemInstance& p, int b);

// Generic route from an (A0, B0, C0) second-moment certificate for grad~G.
EsConstants es_constants_generic(double A0, double B0, double C0,
                                 const SmoothnessProfile& profile);

enum class EsCheckMode { kExhaustive, kMonteCarlo };

// Max over sampled (x, y) points of LHS - RHS for the bound above, where the
// LHS expectation is exact subset enumeration (exhaustive mode, N <= 8) or
// an empirical mean over 2048 draws. Positive values are violations.
double verify_es(const ProblemInstance& p, const EsConstants& es, int b, int n_points,
                 EsCheckMode mode, RngStream& rng, double x_scale = 1.0,
                 double y_scale = 1.0);

// Step-size constants of the descent analysis at a given gamma:
//   K1 = (1 - (10(l + L2*) + 4) gamma - 5 (L2*)^2 gamma^2) / (4 gamma)
//   K2 = 5 (1 + gamma L2*)^2 / (4 gamma^2)
//   K3 = L4* (1 + 5 gamma L4*) + 5 K1 (L4*)^2 / K2,   M = 2 K3,  L = L1 + L3*
// satisfied reports K1 > 0; gamma_max is the threshold root (NaN if none).
struct ThresholdReport {
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;
  double M = 0.0;
  double L = 0.0;
  double gamma_max = 0.0;
  bool satisfied = false;
};

ThresholdReport splitting_constants(double gamma, const SmoothnessProfile& profile);

// Computable stationarity measures at a state:
//   eta        = ||grad G(y) + grad_y H(u, y)||^2   (full gradient, at u)
//   dist_sq    = 2 (||z - z_prev|| / gamma)^2 + 2 (L2*)^2 ||z - z_prev||^2,
//                an upper bound on dist(0, grad_x H(u,y) + dF(u))^2
//   combined   = eta + dist_sq
//   z_residual = ||z - z_prev|| / gamma
struct StationarityRecord {
  double eta = 0.0;
  double dist_sq_proxy = 0.0;
  double combined = 0.0;
  double z_residual = 0.0;
};

StationarityRecord stationarity(const ProblemInstance& p, const SolverState& s,
                                double gamma, double lambda_t = kNaN);

// Envelope-style merit value
//   F(u) + (1/2g)||2x - u - z||^2 - (1/2g)||x - z||^2 - (1/g)||u - x||^2.
double merit_value(const ProblemInstance& p, const SolverState& s, double gamma);

// Least-squares slope of log(min_combined) against log(T) over (T, value)
// pairs; needs >= 3 points with positive values.
double rate_fit(const std::vector<std::pair<double, double>>& budget_and_min);

}  // namespace stam
