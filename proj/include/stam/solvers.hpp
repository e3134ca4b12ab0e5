#pragma once

#include <optional>
#include <string>

#include "stam/problem.hpp"
#include "stam/sampling.hpp"
#include "stam/schedule.hpp"

namespace stam {

struct TraceSink;  // trace.hpp

enum class Algo { kStam, kPsgd, kBc, kBr, kFloat };

Algo algo_from_name(const std::string& name);
std::string algo_name(Algo algo);

// BinaryRelax-specific knobs: the pull weight grows by rho each first-phase
// step; from epoch phase_switch_K on, the blend is replaced by a hard
// projection.
struct BrParams {
  double lambda0 = 1.0;
  double rho = 1.02;
  long phase_switch_K = 0;
  ParamSchedule gamma = ParamSchedule::constant(0.0);
};

struct StepCounters {
  long grad_draws = 0;  // component gradient evaluations
  long prox_calls = 0;  // prox_F / projection calls
};

// One three-block step, Douglas-Rachford shape:
//   y+ = y - (grad~G(y) + grad_y H(x, y)) / beta
//   x+ = argmin_x H(x, y+) + (1/2 gamma) ||x - z||^2
//   u+ = prox_F(2 x+ - z, gamma)
//   z+ = z + (u+ - x+)
// lambda_t feeds the quadratic-coupling closed forms; it is ignored for
// problems with their own H callbacks. Mutates state (z_prev gets the old z)
// and throws NumericError if an iterate leaves the finite range.
void stam_step(const ProblemInstance& p, SolverState& state, double gamma,
               double beta, double lambda_t, const SampleBatch& batch,
               StepCounters* counters = nullptr);

// Closed-form specialization for quantized training; the state slots are
// read as (y, x, u, z) = (W, U, V, X):
//   W+ = ((beta - lambda) W + lambda V - loss_grad) / beta
//   U+ = (gamma lambda W+ + X) / (gamma lambda + 1)
//   V+ = Proj_Q(2 U+ - X)
//   X+ = X + (V+ - U+)
// Note the W update pulls toward the quantized slot V where the generic step
// reads x; feeding the generic step a state whose x slot holds V makes the
// two agree to roundoff (see the equivalence tests).
void stam_quantized_step(const ProblemInstance& p, SolverState& state, double gamma,
                         double beta, double lambda_t, const Vec& loss_grad,
                         StepCounters* counters = nullptr);

// Float iterate plus its evaluation twin: W is the projected (PSGD/BC),
// blended (BR first phase), or identical (float reference) copy of U in the
// full y layout.
struct BaselineState {
  Vec U;
  Vec W;
  double lambda_br = 0.0;
  long t = 0;
};

// Projected SGD: gradient at the float iterate, then project.
void psgd_step(const ProblemInstance& p, BaselineState& state, double gamma,
               double weight_decay, const SampleBatch& batch,
               StepCounters* counters = nullptr);

// BinaryConnect: identical to psgd_step except the gradient is evaluated at
// the quantized iterate W.
void bc_step(const ProblemInstance& p, BaselineState& state, double gamma,
             double weight_decay, const SampleBatch& batch,
             StepCounters* counters = nullptr);

// BinaryRelax: gradient at W; before epoch K the evaluation iterate is the
// relaxed blend with weight lambda_br (which then grows by rho), afterwards a
// hard projection.
void br_step(const ProblemInstance& p, BaselineState& state, const BrParams& br,
             long epoch, double gamma, double weight_decay, const SampleBatch& batch,
             StepCounters* counters = nullptr);

// Unconstrained SGD reference (no projection).
void float_step(const ProblemInstance& p, BaselineState& state, double gamma,
                double weight_decay, const SampleBatch& batch,
                StepCounters* counters = nullptr);

// Largest gamma with K1 > 0: the positive root of
// 5 (L2*)^2 g^2 + (10(l + L2*) + 4) g - 1 = 0, computed in the cancellation-
// free form 2 / (b + sqrt(b^2 + 20 (L2*)^2)); 1/b in the L2* = 0 limit.
// Throws std::domain_error when no positive root exists.
double gamma_threshold(double l, double L2_star);

enum class SamplingMode { kBNice, kEpochShuffle };
enum class EpochMode { kAuto, kIteration, kDatasetPass };

struct SolverParams {
  ParamSchedule gamma = ParamSchedule::constant(1.0);
  ParamSchedule beta = ParamSchedule::constant(1.0);
  // Coupling weight schedule; unset uses the problem's constructed weight.
  std::optional<ParamSchedule> lambda;
  double weight_decay = 0.0;
  BrParams br;
  long T = 0;
  int batch_b = 0;  // 0 means full batch
  SamplingMode sampling = SamplingMode::kBNice;
  EpochMode epoch_mode = EpochMode::kAuto;
  long log_every = 1;
};

struct RunResult {
  SolverState state;  // baselines map in as y = U, x = u = W, z = 0
  StepCounters counters;
  long iterations = 0;
  double best_combined = kInf;
  double best_train_accuracy = kNaN;
  double best_test_accuracy = kNaN;
  bool k1_satisfied_at_start = true;
};

// Runs T steps of the chosen algorithm, emitting one TraceRecord per
// log_every iterations (plus the final one) into sink when given. The run is
// a deterministic function of (problem, params, rng seed/stream). On numeric
// divergence the partial trace is flushed and NumericError is rethrown.
RunResult run_solver(const ProblemInstance& p, Algo algo, const SolverParams& params,
                     const Vec& y0, RngStream rng, TraceSink* sink = nullptr);

}  // namespace stam
