#include "stam/problem.hpp"

#include <algorithm>

namespace stam {

double SmoothnessProfile::max_L1_component() const {
  if (L1_components.empty()) return L1;
  return *std::max_element(L1_components.begin(), L1_components.end());
}

bool SolverState::all_finite() const {
  return y.allFinite() && x.allFinite() && u.allFinite() && z.allFinite();
}

namespace {

void check_dims(const ProblemInstance& p, const Vec& y, const Vec& x) {
  if (y.size() != p.dim_y)
    throw std::invalid_argument("dimension mismatch: y has size " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(p.dim_y));
  if (x.size() != p.dim_x)
    throw std::invalid_argument("dimension mismatch: x has size " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(p.dim_x));
}

}  // namespace

double evaluate_phi(const ProblemInstance& p, const Vec& y, const Vec& x) {
  check_dims(p, y, x);
  const double f = p.value_F(x);
  if (std::isinf(f)) return kInf;
  return f + value_G(p, y) + H_value(p, x, y);
}

double value_G(const ProblemInstance& p, const Vec& y) {
  double sum = 0.0;
  for (int i = 0; i < p.n_components; ++i) sum += p.component_value(i, y);
  return sum / p.n_components;
}

Vec full_gradient_G(const ProblemInstance& p, const Vec& y) {
  if (y.size() != p.dim_y)
    throw std::invalid_argument("full_gradient_G: y has size " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(p.dim_y));
  Vec sum = Vec::Zero(p.dim_y);
  for (int i = 0; i < p.n_components; ++i) {
    Vec g = p.component_gradient(i, y);
    if (!g.allFinite())
      throw NumericError("non-finite gradient in component " + std::to_string(i), -1, i);
    sum += g;
  }
  return sum / p.n_components;
}

double effective_lambda(const ProblemInstance& p, double lambda_t) {
  if (!p.coupling) return kNaN;
  return std::isnan(lambda_t) ? p.coupling->lambda : lambda_t;
}

double H_value(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t) {
  if (p.coupling) {
    const double lam = effective_lambda(p, lambda_t);
    return 0.5 * lam * (x - y.head(p.dim_x)).squaredNorm();
  }
  return p.value_H(x, y);
}

Vec H_grad_x(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t) {
  if (p.coupling) {
    const double lam = effective_lambda(p, lambda_t);
    return lam * (x - y.head(p.dim_x));
  }
  return p.grad_H_x(x, y);
}

Vec H_grad_y(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t) {
  if (p.coupling) {
    const double lam = effective_lambda(p, lambda_t);
    Vec g = Vec::Zero(p.dim_y);
    g.head(p.dim_x) = lam * (y.head(p.dim_x) - x);
    return g;
  }
  return p.grad_H_y(x, y);
}

SolverState make_initial_state(const ProblemInstance& p, const Vec& y0) {
  if (y0.size() != p.dim_y)
    throw std::invalid_argument("make_initial_state: y0 has size " +
                                std::to_string(y0.size()) + ", expected " +
                                std::to_string(p.dim_y));
  SolverState s;
  s.y = y0;
  Vec x0 = y0.head(p.dim_x);
  if (p.quant) x0 = project_Q(x0, *p.quant).dense;
  s.x = x0;
  s.u = x0;
  s.z = x0;
  s.z_prev = x0;
  s.t = 0;
  return s;
}

}  // namespace stam
