#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "stam/problems.hpp"
#include "stam/solvers.hpp"
#include "stam/trace.hpp"

using namespace stam;
using doctest::Approx;

namespace {

SampleBatch full_batch(int N) {
  SampleBatch batch;
  batch.N = N;
  batch.b = N;
  batch.indices.resize(N);
  for (int i = 0; i < N; ++i) batch.indices[i] = i;
  return batch;
}

SolverState state_of(const Vec& y, const Vec& x, const Vec& u, const Vec& z) {
  SolverState s;
  s.y = y;
  s.x = x;
  s.u = u;
  s.z = z;
  s.z_prev = z;
  return s;
}

Vec scalar(double v) {
  Vec out(1);
  out << v;
  return out;
}

Vec vec2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

// L(W) = 1/2 ||W - c||^2 over two coordinates, one quantization layer. The
// single-component sum makes the mean loss equal L itself.
ProblemInstance quad_to_point(const Vec& c) {
  ProblemInstance p;
  p.name = "quad_to_point";
  p.n_components = 1;
  p.dim_y = 2;
  p.dim_x = 2;
  p.component_value = [c](int, const Vec& y) { return 0.5 * (y - c).squaredNorm(); };
  p.component_gradient = [c](int, const Vec& y) -> Vec { return y - c; };
  const QuantizedSpace space = QuantizedSpace::single(2);
  p.quant = space;
  p.value_F = [space](const Vec& x) { return is_in_Q(x, space) ? 0.0 : kInf; };
  p.prox_F = [space](const Vec& v, double) { return project_Q(v, space).dense; };
  p.coupling = QuadraticCoupling{0.0};
  p.smoothness.L1 = 1.0;
  p.smoothness.L1_components = {1.0};
  p.smoothness.Gi_inf = {0.0};
  return p;
}

}  // namespace

TEST_CASE("three-block step worked example on the scalar toy") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverState s = state_of(scalar(0), scalar(0), scalar(0), scalar(0));
  StepCounters counters;
  stam_step(p, s, 1.0, 2.0, kNaN, full_batch(1), &counters);
  CHECK(s.y[0] == 2.0);
  CHECK(s.x[0] == 1.0);
  CHECK(s.u[0] == 2.0);
  CHECK(s.z[0] == 1.0);
  CHECK(s.z_prev[0] == 0.0);
  CHECK(s.t == 1);
  CHECK(counters.grad_draws == 1);
  CHECK(counters.prox_calls == 1);
}

TEST_CASE("a stationary state is a fixed point, exactly") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverState s = state_of(scalar(4), scalar(4), scalar(4), scalar(4));
  for (int it = 0; it < 5; ++it) {
    stam_step(p, s, 1.0, 2.0, kNaN, full_batch(1));
    CHECK(s.y[0] == 4.0);
    CHECK(s.x[0] == 4.0);
    CHECK(s.u[0] == 4.0);
    CHECK(s.z[0] == 4.0);
  }
}

TEST_CASE("step with an indicator constraint routes through the projection") {
  // Large beta freezes y, so the prox chain is observable in isolation.
  Mat A = Mat::Identity(2, 2);
  Vec b = Vec::Zero(2);
  LeastSquaresOptions opts;
  opts.quantized = true;
  const ProblemInstance p = make_least_squares_from(A, b, 1.0, opts);
  SolverState s = state_of(vec2(3, -1), vec2(0, 0), vec2(0, 0), vec2(0, 0));
  stam_step(p, s, 1.0, 1e12, kNaN, full_batch(2));
  CHECK(s.y[0] == Approx(3.0).epsilon(1e-11));
  CHECK(s.y[1] == Approx(-1.0).epsilon(1e-11));
  CHECK(s.x[0] == Approx(1.5).epsilon(1e-11));
  CHECK(s.x[1] == Approx(-0.5).epsilon(1e-11));
  CHECK(s.u[0] == Approx(2.0).epsilon(1e-11));   // Proj_Q(3, -1)
  CHECK(s.u[1] == Approx(-2.0).epsilon(1e-11));
  CHECK(s.z[0] == Approx(0.5).epsilon(1e-11));
  CHECK(s.z[1] == Approx(-1.5).epsilon(1e-11));
}

TEST_CASE("the z update is exactly z + (u - x) at every step") {
  RngStream rng(41, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  opts.n_layers = 2;
  const ProblemInstance p = make_least_squares(4, 6, 1.5, 0.5, rng, opts);
  Vec y0(6);
  for (int j = 0; j < 6; ++j) y0[j] = rng.normal();
  SolverState s = make_initial_state(p, y0);
  for (int it = 0; it < 30; ++it) {
    const Vec z_before = s.z;
    stam_step(p, s, 0.05, 10.0, kNaN, full_batch(4));
    const Vec recomputed = z_before + (s.u - s.x);
    CHECK(s.z == recomputed);
    CHECK(s.z_prev == z_before);
  }
}

TEST_CASE("initial state conventions") {
  RngStream rng(42, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  const ProblemInstance quantized = make_least_squares(3, 4, 1.0, 0.0, rng, opts);
  Vec y0(4);
  y0 << 1.0, -2.0, 3.0, 0.5;
  const SolverState s = make_initial_state(quantized, y0);
  CHECK(s.y == y0);
  CHECK(s.x == project_Q(y0, *quantized.quant).dense);
  CHECK(s.u == s.x);
  CHECK(s.z == s.x);
  CHECK(s.z_prev == s.z);
  CHECK(s.t == 0);

  const ProblemInstance smooth = make_least_squares(3, 4, 1.0, 0.0, rng);
  const SolverState s2 = make_initial_state(smooth, y0);
  CHECK(s2.x == y0);  // identity when F has no constraint
}

TEST_CASE("quantized specialization agrees with the generic step") {
  RngStream rng(43, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  opts.n_layers = 2;
  const ProblemInstance p = make_least_squares(4, 6, 1.5, 0.5, rng, opts);
  const SampleBatch batch = full_batch(4);

  for (int rep = 0; rep < 20; ++rep) {
    Vec W(6), raw(6), X(6);
    for (int j = 0; j < 6; ++j) {
      W[j] = 2.0 * rng.normal();
      raw[j] = 2.0 * rng.normal();
      X[j] = 2.0 * rng.normal();
    }
    const Vec V = project_Q(raw, *p.quant).dense;

    SolverState generic = state_of(W, V, V, X);
    stam_step(p, generic, 0.1, 5.0, kNaN, batch);

    SolverState special = state_of(W, X, V, X);  // x slot is overwritten
    const Vec loss_grad = stochastic_gradient_G(p, W, batch);
    stam_quantized_step(p, special, 0.1, 5.0, kNaN, loss_grad);

    CHECK((special.y - generic.y).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((special.x - generic.x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((special.u - generic.u).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((special.z - generic.z).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("quantized specialization limits") {
  RngStream rng(44, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  const ProblemInstance p = make_least_squares(4, 3, 1.0, 0.0, rng, opts);
  Vec W(3), V(3), X(3);
  W << 1.0, -2.0, 0.5;
  V << 1.0, -1.0, 1.0;
  X << 0.2, 0.1, -0.3;
  Vec g(3);
  g << 0.5, -1.0, 2.0;

  // lambda_t = 0 decouples: W+ = W - g/beta, U+ = X
  SolverState s = state_of(W, X, V, X);
  stam_quantized_step(p, s, 0.7, 4.0, 0.0, g);
  CHECK(s.y == W - g / 4.0);
  CHECK(s.x == X);
}

TEST_CASE("projected SGD worked examples") {
  const ProblemInstance p = quad_to_point(vec2(3, -1));
  const SampleBatch batch = full_batch(1);

  BaselineState s;
  s.U = vec2(1, 1);
  s.W = project_Q(s.U, *p.quant).dense;
  psgd_step(p, s, 0.5, 0.0, batch);
  CHECK(s.U == vec2(2, 0));  // U - 0.5 * (U - c)
  CHECK(s.W == vec2(1, 1));  // Proj_Q(2, 0): scale (2+0)/2 = 1

  // zero step size: float iterate frozen, projection still applied
  BaselineState frozen;
  frozen.U = vec2(1, -3);
  frozen.W = Vec::Zero(2);
  CHECK_THROWS_AS(psgd_step(p, frozen, 0.0, 0.0, batch), std::invalid_argument);
  frozen.W = project_Q(frozen.U, *p.quant).dense;
  CHECK(frozen.W == vec2(2, -2));

  // fixed point of the float dynamics
  BaselineState fixed;
  fixed.U = vec2(3, -1);
  fixed.W = Vec::Zero(2);
  psgd_step(p, fixed, 0.5, 0.0, batch);
  CHECK(fixed.U == vec2(3, -1));
  CHECK(fixed.W == vec2(2, -2));
}

TEST_CASE("BinaryConnect evaluates the gradient at the quantized point") {
  const ProblemInstance p = quad_to_point(vec2(3, -1));
  const SampleBatch batch = full_batch(1);

  // U0 = W0 makes BC and PSGD coincide for one step
  BaselineState bc;
  bc.U = vec2(1, 1);
  bc.W = project_Q(bc.U, *p.quant).dense;  // (1, 1)
  REQUIRE(bc.W == vec2(1, 1));
  bc_step(p, bc, 0.5, 0.0, batch);
  CHECK(bc.U == vec2(2, 0));
  CHECK(bc.W == vec2(1, 1));

  // gradient vanishes at the quantized point: U does not move
  const ProblemInstance q = quad_to_point(vec2(2, -2));
  BaselineState still;
  still.U = vec2(5, 7);
  still.W = vec2(2, -2);
  bc_step(q, still, 0.5, 0.0, batch);
  CHECK(still.U == vec2(5, 7));
}

TEST_CASE("BinaryRelax phases and pull growth") {
  const ProblemInstance p = quad_to_point(vec2(3, -1));
  const SampleBatch batch = full_batch(1);
  BrParams br;
  br.lambda0 = 1.0;
  br.rho = 1.02;
  br.phase_switch_K = 100;

  BaselineState s;
  s.U = vec2(1, 1);
  s.W = s.U;
  s.lambda_br = br.lambda0;
  for (int it = 0; it < 35; ++it) br_step(p, s, br, 0, 0.01, 0.0, batch);
  CHECK(s.lambda_br == Approx(std::pow(1.02, 35)).epsilon(1e-12));
  CHECK(s.lambda_br == Approx(2.0).epsilon(1e-3));

  // first phase with zero pull: evaluation iterate equals the float iterate
  BaselineState zero;
  zero.U = vec2(1, -3);
  zero.W = Vec::Zero(2);
  zero.lambda_br = 0.0;
  BrParams no_pull = br;
  no_pull.rho = 1.5;
  br_step(p, zero, no_pull, 0, 0.5, 0.0, batch);
  CHECK(zero.W == zero.U);

  // second phase is a hard projection and the pull stops growing
  BaselineState hard;
  hard.U = vec2(1, -3);
  hard.W = Vec::Zero(2);
  hard.lambda_br = 7.0;
  br_step(p, hard, br, br.phase_switch_K, 0.5, 0.0, batch);
  CHECK(hard.W == project_Q(hard.U, *p.quant).dense);
  CHECK(hard.lambda_br == 7.0);

  CHECK_THROWS_AS(br_step(p, hard, br, -1, 0.5, 0.0, batch), std::invalid_argument);
}

TEST_CASE("float reference never projects") {
  const ProblemInstance p = quad_to_point(vec2(3, -1));
  BaselineState s;
  s.U = vec2(1, 1);
  s.W = s.U;
  float_step(p, s, 0.5, 0.0, full_batch(1));
  CHECK(s.U == vec2(2, 0));
  CHECK(s.W == s.U);
}

TEST_CASE("weight decay adds an L2 pull on the float iterate") {
  const ProblemInstance p = quad_to_point(vec2(0, 0));
  BaselineState s;
  s.U = vec2(10, -10);
  s.W = s.U;
  float_step(p, s, 0.1, 0.01, full_batch(1));
  // g = U + wd U = 1.01 U; U+ = U - 0.1 * 1.01 U
  CHECK(s.U[0] == Approx(10.0 * (1.0 - 0.101)).epsilon(1e-15));
}

TEST_CASE("step size threshold worked values") {
  CHECK(gamma_threshold(1.0, 1.0) == Approx((std::sqrt(596.0) - 24.0) / 10.0).epsilon(1e-14));
  CHECK(gamma_threshold(0.0, 0.0) == 0.25);
  CHECK(gamma_threshold(-0.3, 0.0) == Approx(1.0));
  CHECK_THROWS_AS(gamma_threshold(-0.4, 0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_threshold(-1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_threshold(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("algorithm names round-trip") {
  for (Algo a : {Algo::kStam, Algo::kPsgd, Algo::kBc, Algo::kBr, Algo::kFloat})
    CHECK(algo_from_name(algo_name(a)) == a);
  CHECK_THROWS_AS(algo_from_name("adam"), std::invalid_argument);
}

TEST_CASE("run with T = 0 returns the start state and an empty trace") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverParams params;
  params.T = 0;
  MemoryTrace trace;
  const RunResult r = run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0), &trace);
  CHECK(trace.records.empty());
  CHECK(r.iterations == 0);
  CHECK(r.state.y[0] == 0.0);
  CHECK(r.state.t == 0);
}

TEST_CASE("deterministic runs produce identical traces") {
  RngStream data_rng(45, 0);
  const ProblemInstance p = make_least_squares(8, 4, 1.0, 0.5, data_rng);
  SolverParams params;
  params.gamma = ParamSchedule::constant(0.05);
  params.beta = ParamSchedule::constant(10.0);
  params.T = 50;
  params.batch_b = 2;
  Vec y0 = Vec::Zero(4);

  MemoryTrace t1, t2;
  run_solver(p, Algo::kStam, params, y0, RngStream(7, 3), &t1);
  run_solver(p, Algo::kStam, params, y0, RngStream(7, 3), &t2);
  REQUIRE(t1.records.size() == t2.records.size());
  for (size_t i = 0; i < t1.records.size(); ++i) {
    CHECK(t1.records[i].combined == t2.records[i].combined);
    CHECK(t1.records[i].objective == t2.records[i].objective);
    CHECK(t1.records[i].merit == t2.records[i].merit);
  }

  MemoryTrace t3;
  run_solver(p, Algo::kStam, params, y0, RngStream(8, 3), &t3);
  bool any_diff = false;
  for (size_t i = 0; i < t3.records.size(); ++i)
    if (t3.records[i].combined != t1.records[i].combined) any_diff = true;
  CHECK(any_diff);  // a different seed draws different batches
}

TEST_CASE("full-batch run on the scalar toy converges") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverParams params;
  params.gamma = ParamSchedule::constant(1.0);
  params.beta = ParamSchedule::constant(2.0);
  params.T = 200;
  const RunResult r = run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0));
  CHECK((r.state.u - r.state.x).norm() < 1e-10);
  CHECK(r.best_combined < 1e-10);
  CHECK(r.counters.grad_draws == 200);
}

TEST_CASE("logging interval emits every k-th record plus the final one") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverParams params;
  params.gamma = ParamSchedule::constant(1.0);
  params.beta = ParamSchedule::constant(2.0);
  params.T = 10;
  params.log_every = 3;
  MemoryTrace trace;
  run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0), &trace);
  REQUIRE(trace.records.size() == 4);
  CHECK(trace.records[0].t == 3);
  CHECK(trace.records[1].t == 6);
  CHECK(trace.records[2].t == 9);
  CHECK(trace.records[3].t == 10);
}

TEST_CASE("numeric divergence flushes the partial trace and rethrows") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverParams params;
  params.gamma = ParamSchedule::constant(1.0);
  params.beta = ParamSchedule::constant(1e-300);
  params.T = 10;
  MemoryTrace trace;
  CHECK_THROWS_AS(run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0), &trace),
                  NumericError);
  CHECK(trace.records.size() >= 1);  // records up to the failing step survive
}

TEST_CASE("invalid run parameters are rejected") {
  const ProblemInstance p = make_scalar_toy(4.0);
  SolverParams params;
  params.T = 10;
  params.batch_b = 2;  // > n_components = 1
  CHECK_THROWS_AS(run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0)),
                  std::invalid_argument);
  params.batch_b = 0;
  params.T = -5;
  CHECK_THROWS_AS(run_solver(p, Algo::kStam, params, scalar(0), RngStream(1, 0)),
                  std::invalid_argument);
}

TEST_CASE("objective descends for admissible step sizes") {
  RngStream rng(46, 0);
  const ProblemInstance p = make_least_squares(6, 3, 1.0, 0.3, rng);
  // l = 0, L2* = 1: threshold is 2/(14 + sqrt(196 + 20)) ~ 0.0697
  const double gamma = 0.9 * gamma_threshold(p.smoothness.l, p.smoothness.L2_star);
  const double beta = 1.2 * p.smoothness.L();
  SolverState s = make_initial_state(p, Vec::Zero(3));
  double prev = kInf;
  for (int it = 0; it < 100; ++it) {
    stam_step(p, s, gamma, beta, kNaN, full_batch(6));
    const double phi = evaluate_phi(p, s.y, s.x);
    if (it >= 1) CHECK(phi <= prev + 1e-12);
    prev = phi;
  }
}

TEST_CASE("epoch column counts dataset passes in shuffle mode") {
  RngStream rng(47, 0);
  const ProblemInstance p = make_least_squares(8, 3, 1.0, 0.5, rng);
  SolverParams params;
  params.gamma = ParamSchedule::constant(0.05);
  params.beta = ParamSchedule::constant(10.0);
  params.T = 8;
  params.batch_b = 4;
  params.sampling = SamplingMode::kEpochShuffle;
  params.epoch_mode = EpochMode::kDatasetPass;
  MemoryTrace trace;
  run_solver(p, Algo::kStam, params, Vec::Zero(3), RngStream(9, 0), &trace);
  REQUIRE(trace.records.size() == 8);
  CHECK(trace.records[0].epoch == 0);  // steps 1-2 complete the first pass
  CHECK(trace.records[1].epoch == 0);
  CHECK(trace.records[2].epoch == 1);
  CHECK(trace.records[3].epoch == 1);
  CHECK(trace.records[4].epoch == 2);
}

TEST_CASE("baseline runs report accuracy-free stationarity on synthetic problems") {
  RngStream rng(48, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  const ProblemInstance p = make_least_squares(6, 4, 1.0, 0.3, rng, opts);
  SolverParams params;
  params.gamma = ParamSchedule::constant(0.02);
  params.T = 20;
  MemoryTrace trace;
  const RunResult r = run_solver(p, Algo::kPsgd, params, Vec::Zero(4), RngStream(2, 0), &trace);
  REQUIRE(trace.records.size() == 20);
  for (const auto& rec : trace.records) {
    CHECK(std::isfinite(rec.eta));
    CHECK(rec.dist_sq_proxy >= 0.0);
    CHECK_FALSE(rec.train_accuracy.has_value());
    CHECK(rec.beta == 0.0);
  }
  CHECK(std::isnan(r.best_train_accuracy));
}
