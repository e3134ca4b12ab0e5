#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "stam/quantization.hpp"
#include "stam/types.hpp"

namespace stam {

// Curvature and infimum data a problem declares about itself. L1 bounds the
// gradient Lipschitz constant of the mean loss G (per-component constants in
// L1_components); the starred constants bound the coupling H:
//   L2*  Lipschitz modulus of grad_x H(., y)
//   L3*  Lipschitz modulus of grad_y H(x, .)
//   L4*  Lipschitz modulus of grad_x H(x, .) across y
//   L5*  Lipschitz modulus of grad_y H(., y) across x
// l makes H(., y) + (l/2)||.||^2 convex (l <= L2* always works). Infima are
// lower bounds used by the second-moment constants; they need not be tight.
struct SmoothnessProfile {
  double L1 = 0.0;
  std::vector<double> L1_components;
  double L2_star = 0.0;
  double L3_star = 0.0;
  double L4_star = 0.0;
  double L5_star = 0.0;
  double l = 0.0;
  double G_inf = 0.0;
  std::vector<double> Gi_inf;
  double H_inf = 0.0;
  double GH_inf = 0.0;
  // Set when L1 is a configured estimate rather than an analytic constant
  // (the MLP loss has no cheap global constant).
  bool L1_is_estimate = false;

  double max_L1_component() const;
  // Smoothness constant of y |-> G(y) + H(x, y).
  double L() const { return L1 + L3_star; }
};

// Marks H(x, y) = (lambda/2) ||x - y[0:dim_x]||^2. Solvers use the closed
// prox form for such problems and may override lambda per epoch.
struct QuadraticCoupling {
  double lambda = 0.0;
};

// A three-block objective F(x) + G(y) + H(x, y) where G is the mean of
// n_components smooth summands. All callbacks are total on vectors of the
// declared dimensions.
struct ProblemInstance {
  std::string name;
  int n_components = 0;
  int dim_y = 0;
  int dim_x = 0;

  std::function<double(int, const Vec&)> component_value;
  std::function<Vec(int, const Vec&)> component_gradient;

  std::function<double(const Vec&, const Vec&)> value_H;  // (x, y)
  std::function<Vec(const Vec&, const Vec&)> grad_H_x;
  std::function<Vec(const Vec&, const Vec&)> grad_H_y;

  std::function<double(const Vec&)> value_F;            // may return +inf
  std::function<Vec(const Vec&, double)> prox_F;        // (v, gamma)
  // Exact minimizer of H(., y) + (1/2 gamma)||. - z||^2 for problems whose H
  // is not the quadratic coupling; unset otherwise.
  std::function<Vec(const Vec&, const Vec&, double)> prox_H_x;  // (y, z, gamma)

  SmoothnessProfile smoothness;
  std::optional<QuadraticCoupling> coupling;
  std::optional<QuantizedSpace> quant;  // set when F is the indicator of Q

  // Optional dataset-backed metrics, evaluated on a full parameter vector in
  // y layout. Unset for synthetic problems.
  std::function<double(const Vec&)> train_accuracy;
  std::function<double(const Vec&)> test_accuracy;
  bool dataset_backed = false;
};

// Iterates of the three-block methods. y is the smooth block, x the prox
// block, u the reflected/projected point, z the running shift. z_prev trails
// z by one step for the residual diagnostics (z_prev = z at t = 0).
struct SolverState {
  Vec y, x, u, z, z_prev;
  long t = 0;

  bool all_finite() const;
};

// F(x) + G(y) + H(x, y); +inf when x violates the constraint in F.
double evaluate_phi(const ProblemInstance& p, const Vec& y, const Vec& x);

// Mean of the component gradients. Throws NumericError naming the component
// if a summand produces a non-finite gradient.
Vec full_gradient_G(const ProblemInstance& p, const Vec& y);

double value_G(const ProblemInstance& p, const Vec& y);

// H evaluation that honors a per-epoch coupling weight: for quadratic
// coupling problems the closed form with lambda_t is used (lambda_t = NaN
// falls back to the constructed weight); otherwise the problem callbacks.
double H_value(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t = kNaN);
Vec H_grad_x(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t = kNaN);
Vec H_grad_y(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda_t = kNaN);

// Coupling weight in effect: lambda_t when given and the problem couples
// quadratically, else the constructed weight, else NaN.
double effective_lambda(const ProblemInstance& p, double lambda_t);

// Initial state per the solver conventions: x0 = Proj_Q(coupled part of y0)
// for quantized problems (identity otherwise), u0 = x0, z0 = x0, z_prev = z0.
SolverState make_initial_state(const ProblemInstance& p, const Vec& y0);

}  // namespace stam
