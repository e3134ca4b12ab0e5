#include "stam/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stam/diagnostics.hpp"
#include "stam/mlp.hpp"
#include "stam/problems.hpp"
#include "stam/quantization.hpp"
#include "stam/sampling.hpp"
#include "stam/solvers.hpp"

namespace stam {

namespace {

// Smallest ||U - s*sigma||^2 over every sign pattern sigma and s >= 0,
// by brute force over all 2^n patterns.
double exhaustive_projection_dist_sq(const Vec& U) {
  const int n = static_cast<int>(U.size());
  const double norm_sq = U.squaredNorm();
  double best = kInf;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += (mask >> j & 1) ? U[j] : -U[j];
    const double s = std::max(0.0, dot / n);
    best = std::min(best, norm_sq - 2.0 * s * dot + s * s * n);
  }
  return best;
}

}  // namespace

std::vector<CheckResult> check_projection() {
  double worst = 0.0;
  for (int n = 1; n <= 12; ++n) {
    RngStream rng(2026, static_cast<std::uint64_t>(n));
    const QuantizedSpace space = QuantizedSpace::single(n);
    for (int trial = 0; trial < 1000; ++trial) {
      Vec U(n);
      for (int j = 0; j < n; ++j) U[j] = rng.normal();
      // Every tenth vector gets integer entries to exercise exact ties and
      // zero coordinates.
      if (trial % 10 == 0)
        for (int j = 0; j < n; ++j) U[j] = std::round(std::clamp(U[j], -2.0, 2.0));
      const double closed = distance_to_Q(U, space);
      const double gap = std::abs(closed * closed - exhaustive_projection_dist_sq(U));
      worst = std::max(worst, gap);
    }
  }
  CheckResult r{"projection_vs_exhaustive", worst <= 1e-12, worst, 1e-12,
                "layer lengths 1..12, 1000 vectors each"};
  return {r};
}

std::vector<CheckResult> check_unbiasedness() {
  std::vector<CheckResult> out;

  double worst_mean = 0.0;
  for (int N = 1; N <= 8; ++N) {
    RngStream data_rng(11, static_cast<std::uint64_t>(N));
    const ProblemInstance p = make_least_squares(N, 3, 1.0, 0.5, data_rng);
    for (int b = 1; b <= N; ++b) {
      const auto batches = enumerate_batches(N, b);
      RngStream point_rng(12, static_cast<std::uint64_t>(N * 16 + b));
      for (int pt = 0; pt < 20; ++pt) {
        Vec y(3);
        for (int j = 0; j < 3; ++j) y[j] = point_rng.normal();
        Vec avg = Vec::Zero(3);
        for (const auto& batch : batches) avg += stochastic_gradient_G(p, y, batch);
        avg /= static_cast<double>(batches.size());
        const Vec full = full_gradient_G(p, y);
        worst_mean = std::max(worst_mean, (avg - full).cwiseAbs().maxCoeff());
      }
    }
  }
  out.push_back({"estimator_mean_vs_full_gradient", worst_mean <= 1e-12, worst_mean, 1e-12,
                 "all N <= 8, all b, 20 points, every subset"});

  // Weight moments against exact counting: E[v_i] must equal 1 and E[v_i^2]
  // must equal the closed form N/b bit for bit (the enumerated expectation is
  // a ratio of small exact integers, so no rounding slack is needed).
  double worst_second = 0.0;
  double worst_first = 0.0;
  for (int N = 1; N <= 8; ++N) {
    for (int b = 1; b <= N; ++b) {
      const auto batches = enumerate_batches(N, b);
      const long total = static_cast<long>(batches.size());
      for (int i = 0; i < N; ++i) {
        long count = 0;
        for (const auto& batch : batches)
          if (std::binary_search(batch.indices.begin(), batch.indices.end(), i)) ++count;
        const double e_v = static_cast<double>(count * N) / static_cast<double>(b * total);
        const double e_v2 = static_cast<double>(count * N * N) /
                            static_cast<double>(static_cast<long>(b) * b * total);
        worst_first = std::max(worst_first, std::abs(e_v - 1.0));
        worst_second = std::max(worst_second, std::abs(e_v2 - second_moment_vi(N, b)));
      }
    }
  }
  out.push_back({"weight_first_moment_exact", worst_first == 0.0, worst_first, 0.0,
                 "E[v_i] == 1 exactly"});
  out.push_back({"weight_second_moment_exact", worst_second == 0.0, worst_second, 0.0,
                 "E[v_i^2] == N/b exactly"});
  return out;
}

std::vector<CheckResult> check_es() {
  std::vector<CheckResult> out;

  // Least squares with the coupling weight at twice the worst component
  // curvature. On coupling-dominated sweep points the bound's attainable
  // ratio is 2 lambda / (4 max_L1 E[v^2] + lambda): at full batch that is
  // 2/3, so the true constants hold with margin while halving A flips the
  // sign. Larger weights would break the true bound itself (it requires
  // lambda <= 2 max_L1 E[v^2]).
  const int N = 8, d = 4;
  RngStream data_rng(21, 0);
  Mat A(N, d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = data_rng.normal();
  Vec y_true(d);
  for (int j = 0; j < d; ++j) y_true[j] = data_rng.normal();
  Vec b_vec = A * y_true;
  for (int i = 0; i < N; ++i) b_vec[i] += 0.5 * data_rng.normal();
  double max_L1 = 0.0;
  for (int i = 0; i < N; ++i) max_L1 = std::max(max_L1, A.row(i).squaredNorm());
  const double lambda = 2.0 * max_L1;
  const ProblemInstance p = make_least_squares_from(A, b_vec, lambda);

  double worst_true = -kInf;
  double best_control = -kInf;
  for (int b : {1, 2, 4, 8}) {
    const EsConstants es = es_constants_finite_sum(p, b);
    {
      RngStream sweep(22, static_cast<std::uint64_t>(b));
      worst_true = std::max(
          worst_true, verify_es(p, es, b, 100, EsCheckMode::kExhaustive, sweep, 5.0, 1.0));
    }
    EsConstants half = es;
    half.A *= 0.5;
    half.C = 2.0 * half.A * half.delta_inf;
    {
      RngStream sweep(22, static_cast<std::uint64_t>(b));  // identical sweep
      best_control = std::max(
          best_control, verify_es(p, half, b, 100, EsCheckMode::kExhaustive, sweep, 5.0, 1.0));
    }
  }
  out.push_back({"second_moment_bound_finite_sum", worst_true <= 1e-9, worst_true, 1e-9,
                 "N=8, b in {1,2,4,8}, 100 points, exact enumeration"});
  out.push_back({"falsification_control_halved_A", best_control > 0.0, best_control, 0.0,
                 "halved A must flip positive somewhere on the same sweep"});

  // Full batch with the generic certificate (A0=0, B0=1, C0=0): the single
  // subset is the full gradient, and the bound follows from smoothness alone.
  const EsConstants gen = es_constants_generic(0.0, 1.0, 0.0, p.smoothness);
  RngStream sweep(23, 0);
  const double full_batch = verify_es(p, gen, N, 50, EsCheckMode::kExhaustive, sweep, 2.0, 1.0);
  out.push_back({"full_batch_generic_certificate", full_batch <= 1e-9, full_batch, 1e-9,
                 "b = N, A = max(2 L1, 2 L3*)"});
  return out;
}

std::vector<CheckResult> check_threshold() {
  std::vector<CheckResult> out;

  RngStream rng(31, 0);
  int sign_failures = 0;
  int flag_failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    SmoothnessProfile prof;
    prof.l = 5.0 * rng.uniform01();
    prof.L2_star = 5.0 * rng.uniform01();
    const double gmax = gamma_threshold(prof.l, prof.L2_star);
    if (!(splitting_constants(0.9 * gmax, prof).K1 > 0.0)) ++sign_failures;
    if (!(splitting_constants(1.1 * gmax, prof).K1 < 0.0)) ++sign_failures;
    const double gamma = gmax * (0.2 + 1.6 * rng.uniform01());
    const ThresholdReport rep = splitting_constants(gamma, prof);
    if (rep.satisfied != (gamma < rep.gamma_max)) ++flag_failures;
  }
  out.push_back({"K1_sign_flip_at_threshold", sign_failures == 0,
                 static_cast<double>(sign_failures), 0.0,
                 "50 random profiles, K1 > 0 at 0.9 gmax and K1 < 0 at 1.1 gmax"});
  out.push_back({"satisfied_flag_matches_threshold", flag_failures == 0,
                 static_cast<double>(flag_failures), 0.0, "satisfied == (gamma < gamma_max)"});

  // Worked profile: the closed form must agree with a bisection root of the
  // defining polynomial 1 - 24 g - 5 g^2.
  auto f = [](double g) { return 1.0 - 24.0 * g - 5.0 * g * g; };
  double lo = 0.0, hi = 0.25;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double dev = std::abs(gamma_threshold(1.0, 1.0) - 0.5 * (lo + hi));
  out.push_back({"threshold_matches_bisection_root", dev <= 1e-10, dev, 1e-10,
                 "l = L2* = 1 against 1 - 24g - 5g^2"});
  return out;
}

namespace {

// Max normalized gap between analytic and central-difference gradients of
// component i over every coordinate.
double fd_component_gap(const ProblemInstance& p, int i, const Vec& y, double h) {
  const Vec g = p.component_gradient(i, y);
  double worst = 0.0;
  Vec yp = y;
  for (int j = 0; j < y.size(); ++j) {
    const double saved = yp[j];
    yp[j] = saved + h;
    const double up = p.component_value(i, yp);
    yp[j] = saved - h;
    const double dn = p.component_value(i, yp);
    yp[j] = saved;
    worst = std::max(worst, std::abs((up - dn) / (2.0 * h) - g[j]));
  }
  return worst / (1.0 + g.cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<CheckResult> check_gradients() {
  std::vector<CheckResult> out;
  const double h = 1e-5;

  RngStream rng(41, 0);
  const ProblemInstance ls = make_least_squares(6, 4, 1.3, 0.5, rng);
  const ProblemInstance lg = make_logistic(6, 4, 0.8, rng);

  double worst_fd = 0.0;
  for (const ProblemInstance* p : {&ls, &lg}) {
    for (int pt = 0; pt < 5; ++pt) {
      Vec y(p->dim_y);
      for (int j = 0; j < y.size(); ++j) y[j] = rng.normal();
      for (int i = 0; i < p->n_components; ++i)
        worst_fd = std::max(worst_fd, fd_component_gap(*p, i, y, h));
    }
  }
  out.push_back({"component_gradients_vs_fd", worst_fd <= 1e-6, worst_fd, 1e-6,
                 "least squares and logistic, central differences"});

  // Network gradients, all coordinates of a 2-4-2 net.
  RngStream blob_rng(42, 0);
  const Dataset blob = make_blobs(10, 2, 2, 4.0, blob_rng);
  MlpSpec spec;
  spec.input_dim = 2;
  spec.hidden = {4};
  spec.n_classes = 2;
  const ProblemInstance mlp = make_mlp_problem(spec, blob, Dataset{}, {0.7, 1.0, true});
  double worst_mlp = 0.0;
  RngStream mlp_rng(43, 0);
  for (int pt = 0; pt < 3; ++pt) {
    Vec y(mlp.dim_y);
    for (int j = 0; j < y.size(); ++j) y[j] = 0.5 * mlp_rng.normal();
    for (int i = 0; i < mlp.n_components; i += 4)
      worst_mlp = std::max(worst_mlp, fd_component_gap(mlp, i, y, h));
  }
  out.push_back({"network_gradients_vs_fd", worst_mlp <= 1e-6, worst_mlp, 1e-6,
                 "2-4-2 net, every weight and bias"});

  // Coupling gradients against finite differences of the coupling value,
  // with a per-step weight override in effect.
  double worst_h = 0.0;
  RngStream h_rng(44, 0);
  {
    const double lambda_t = 2.3;
    Vec x(ls.dim_x), y(ls.dim_y);
    for (int pt = 0; pt < 5; ++pt) {
      for (int j = 0; j < x.size(); ++j) x[j] = h_rng.normal();
      for (int j = 0; j < y.size(); ++j) y[j] = h_rng.normal();
      const Vec gx = H_grad_x(ls, x, y, lambda_t);
      const Vec gy = H_grad_y(ls, x, y, lambda_t);
      for (int j = 0; j < x.size(); ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (H_value(ls, xp, y, lambda_t) - H_value(ls, xm, y, lambda_t)) / (2 * h);
        worst_h = std::max(worst_h, std::abs(fd - gx[j]));
      }
      for (int j = 0; j < y.size(); ++j) {
        Vec yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        const double fd = (H_value(ls, x, yp, lambda_t) - H_value(ls, x, ym, lambda_t)) / (2 * h);
        worst_h = std::max(worst_h, std::abs(fd - gy[j]));
      }
    }
  }
  out.push_back({"coupling_gradients_vs_fd", worst_h <= 1e-6, worst_h, 1e-6,
                 "grad_x H and grad_y H with lambda override"});

  // Per-component curvature bound ||grad G_i||^2 <= 2 L1_i (G_i - Gi_inf)
  // across three scales of test points.
  double worst_bound = -kInf;
  RngStream bound_rng(45, 0);
  const double scales[] = {0.1, 1.0, 10.0};
  for (const ProblemInstance* p : {&ls, &lg}) {
    for (int pt = 0; pt < 1000; ++pt) {
      const double s = scales[pt % 3];
      Vec y(p->dim_y);
      for (int j = 0; j < y.size(); ++j) y[j] = s * bound_rng.normal();
      for (int i = 0; i < p->n_components; ++i) {
        const double lhs = p->component_gradient(i, y).squaredNorm();
        const double rhs = 2.0 * p->smoothness.L1_components[i] *
                           (p->component_value(i, y) - p->smoothness.Gi_inf[i]);
        worst_bound = std::max(worst_bound, lhs - rhs);
      }
    }
  }
  out.push_back({"component_gradient_norm_bound", worst_bound <= 1e-9, worst_bound, 1e-9,
                 "||grad G_i||^2 <= 2 L1_i (G_i - Gi_inf), 1000 points per problem"});
  return out;
}

bool report_checks(const std::vector<CheckResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-40s deviation %.4g (bound %.4g) %s\n", r.pass ? "ok" : "FAIL",
                r.name.c_str(), r.deviation, r.bound, r.detail.c_str());
    all = all && r.pass;
  }
  return all;
}

}  // namespace stam
