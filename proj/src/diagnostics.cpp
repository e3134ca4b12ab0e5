#include "stam/diagnostics.hpp"

#include <cmath>
#include <cstdio>

#include "stam/solvers.hpp"

namespace stam {

EsConstants es_constants_finite_sum(const ProblemInstance& p, int b) {
  const SmoothnessProfile& sp = p.smoothness;
  if (sp.L1_components.empty())
    throw std::invalid_argument("es_constants_finite_sum: no per-component L1 bounds");
  const double ev2 = second_moment_vi(p.n_components, b);
  EsConstants es;
  es.source = EsConstants::Source::kFiniteSum;
  es.N = p.n_components;
  es.b = b;
  double max_term = 0.0;
  for (double L1i : sp.L1_components) max_term = std::max(max_term, L1i * ev2);
  es.A = (4.0 * max_term + sp.L3_star) / 2.0;

  double mean_gi_inf = 0.0;
  if (!sp.Gi_inf.empty()) {
    if (static_cast<int>(sp.Gi_inf.size()) != p.n_components)
      throw std::invalid_argument("es_constants_finite_sum: Gi_inf has wrong length");
    for (double v : sp.Gi_inf) mean_gi_inf += v;
    mean_gi_inf /= p.n_components;
  }
  es.delta_inf = sp.GH_inf - mean_gi_inf - sp.H_inf;
  if (es.delta_inf < 0.0 && es.delta_inf > -1e-12) {
    std::fprintf(stderr,
                 "warning: infimum gap %.3e is negative at floating precision; "
                 "clamping to 0\n",
                 es.delta_inf);
    es.delta_inf = 0.0;
  }
  if (es.delta_inf < 0.0)
    throw std::invalid_argument(
        "es_constants_finite_sum: declared infima give a negative gap; "
        "the per-component lower bounds are inconsistent");
  es.C = 2.0 * es.A * es.delta_inf;
  return es;
}

EsConstants es_constants_generic(double A0, double B0, double C0,
                                 const SmoothnessProfile& profile) {
  if (A0 < 0.0 || B0 < 0.0 || C0 < 0.0)
    throw std::invalid_argument("es_constants_generic: constants must be nonnegative");
  EsConstants es;
  es.source = EsConstants::Source::kGeneric;
  es.A0 = A0;
  es.B0 = B0;
  es.C0 = C0;
  es.A = std::max(2.0 * A0 + 2.0 * B0 * profile.L1, 2.0 * profile.L3_star);
  const double gap = profile.GH_inf - profile.G_inf - profile.H_inf;
  es.delta_inf = gap;
  es.C = 2.0 * es.A * gap + 2.0 * C0;
  return es;
}

double verify_es(const ProblemInstance& p, const EsConstants& es, int b, int n_points,
                 EsCheckMode mode, RngStream& rng, double x_scale, double y_scale) {
  const int N = p.n_components;
  std::vector<SampleBatch> all;
  if (mode == EsCheckMode::kExhaustive) {
    if (N > 8)
      throw std::invalid_argument("verify_es: exhaustive mode needs N <= 8");
    all = enumerate_batches(N, b);
  }
  constexpr int kMcDraws = 2048;

  double worst = -kInf;
  for (int pt = 0; pt < n_points; ++pt) {
    Vec y(p.dim_y), x(p.dim_x);
    for (int j = 0; j < p.dim_y; ++j) y[j] = y_scale * rng.normal();
    for (int j = 0; j < p.dim_x; ++j) x[j] = x_scale * rng.normal();

    const Vec hy = H_grad_y(p, x, y);
    double lhs = 0.0;
    if (mode == EsCheckMode::kExhaustive) {
      for (const SampleBatch& batch : all)
        lhs += (stochastic_gradient_G(p, y, batch) + hy).squaredNorm();
      lhs /= all.size();
    } else {
      for (int k = 0; k < kMcDraws; ++k) {
        SampleBatch batch = draw_b_nice(N, b, rng);
        lhs += (stochastic_gradient_G(p, y, batch) + hy).squaredNorm();
      }
      lhs /= kMcDraws;
    }

    const double gap = value_G(p, y) + H_value(p, x, y) - p.smoothness.GH_inf;
    const double rhs = 2.0 * es.A * gap + es.C;
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

ThresholdReport splitting_constants(double gamma, const SmoothnessProfile& sp) {
  if (gamma <= 0.0) throw std::invalid_argument("splitting_constants: gamma must be > 0");
  ThresholdReport r;
  const double l = sp.l;
  const double L2 = sp.L2_star;
  const double L4 = sp.L4_star;
  r.K1 = (1.0 - (10.0 * (l + L2) + 4.0) * gamma - 5.0 * L2 * L2 * gamma * gamma) /
         (4.0 * gamma);
  const double one_gl2 = 1.0 + gamma * L2;
  r.K2 = 5.0 * one_gl2 * one_gl2 / (4.0 * gamma * gamma);
  r.K3 = L4 * (1.0 + 5.0 * gamma * L4) + 5.0 * r.K1 * L4 * L4 / r.K2;
  r.M = 2.0 * r.K3;
  r.L = sp.L();
  try {
    r.gamma_max = gamma_threshold(l, L2);
  } catch (const std::domain_error&) {
    r.gamma_max = kNaN;
  }
  r.satisfied = r.K1 > 0.0;
  return r;
}

StationarityRecord stationarity(const ProblemInstance& p, const SolverState& s,
                                double gamma, double lambda_t) {
  if (gamma <= 0.0) throw std::invalid_argument("stationarity: gamma must be > 0");
  StationarityRecord rec;
  rec.eta = (full_gradient_G(p, s.y) + H_grad_y(p, s.u, s.y, lambda_t)).squaredNorm();
  const Vec dz = s.z - s.z_prev;
  const double dz2 = dz.squaredNorm();
  double L2 = p.smoothness.L2_star;
  if (p.coupling && !std::isnan(lambda_t)) L2 = lambda_t;
  rec.dist_sq_proxy = 2.0 * dz2 / (gamma * gamma) + 2.0 * L2 * L2 * dz2;
  rec.combined = rec.eta + rec.dist_sq_proxy;
  rec.z_residual = std::sqrt(dz2) / gamma;
  return rec;
}

double merit_value(const ProblemInstance& p, const SolverState& s, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("merit_value: gamma must be > 0");
  const double f = p.value_F(s.u);
  const double refl = (2.0 * s.x - s.u - s.z).squaredNorm();
  const double anchor = (s.x - s.z).squaredNorm();
  const double gap = (s.u - s.x).squaredNorm();
  return f + refl / (2.0 * gamma) - anchor / (2.0 * gamma) - gap / gamma;
}

double rate_fit(const std::vector<std::pair<double, double>>& budget_and_min) {
  if (budget_and_min.size() < 3)
    throw std::invalid_argument("rate_fit: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(budget_and_min.size());
  for (const auto& [T, v] : budget_and_min) {
    if (T <= 0.0 || v <= 0.0)
      throw std::invalid_argument("rate_fit: budgets and values must be positive");
    const double lx = std::log(T);
    const double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate_fit: degenerate budgets");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace stam
