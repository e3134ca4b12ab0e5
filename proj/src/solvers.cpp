#include "stam/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "stam/diagnostics.hpp"
#include "stam/trace.hpp"

namespace stam {

Algo algo_from_name(const std::string& name) {
  if (name == "stam") return Algo::kStam;
  if (name == "psgd") return Algo::kPsgd;
  if (name == "bc") return Algo::kBc;
  if (name == "br") return Algo::kBr;
  if (name == "float") return Algo::kFloat;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected stam, psgd, bc, br, or float)");
}

std::string algo_name(Algo algo) {
  switch (algo) {
    case Algo::kStam: return "stam";
    case Algo::kPsgd: return "psgd";
    case Algo::kBc: return "bc";
    case Algo::kBr: return "br";
    case Algo::kFloat: return "float";
  }
  return "?";
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

void check_step_finite(const SolverState& s) {
  if (!s.all_finite())
    throw NumericError("non-finite iterate at step " + std::to_string(s.t), s.t);
}

// x+ = argmin_x H(x, y) + (1/2 gamma) ||x - z||^2. Closed form for the
// quadratic coupling; otherwise the problem must provide the minimizer.
Vec prox_H(const ProblemInstance& p, const Vec& y, const Vec& z, double gamma,
           double lambda_t) {
  if (p.coupling) {
    const double gl = gamma * effective_lambda(p, lambda_t);
    return (gl * y.head(p.dim_x) + z) / (gl + 1.0);
  }
  if (p.prox_H_x) return p.prox_H_x(y, z, gamma);
  throw std::invalid_argument(
      "problem has neither a quadratic coupling nor an exact prox for H");
}

// Evaluation twin of a float iterate: quantized coordinates projected, the
// rest passed through.
Vec project_eval(const ProblemInstance& p, const Vec& U) {
  if (!p.quant) return U;
  Vec W = U;
  W.head(p.dim_x) = project_Q(U.head(p.dim_x), *p.quant).dense;
  return W;
}

Vec blend_eval(const ProblemInstance& p, const Vec& U, double lambda) {
  if (!p.quant) return U;
  Vec W = U;
  W.head(p.dim_x) = relaxed_blend(U.head(p.dim_x), *p.quant, lambda);
  return W;
}

void baseline_gradient_step(const ProblemInstance& p, BaselineState& state,
                            const Vec& eval_point, double gamma, double weight_decay,
                            const SampleBatch& batch, StepCounters* counters) {
  require_positive(gamma, "gamma");
  Vec g = stochastic_gradient_G(p, eval_point, batch);
  if (weight_decay != 0.0) g += weight_decay * state.U;
  state.U -= gamma * g;
  if (counters) counters->grad_draws += static_cast<long>(batch.indices.size());
  // state.t is incremented by the caller, so the step being computed is t + 1.
  if (!state.U.allFinite())
    throw NumericError("non-finite iterate at step " + std::to_string(state.t + 1),
                       state.t + 1);
}

}  // namespace

void stam_step(const ProblemInstance& p, SolverState& state, double gamma,
               double beta, double lambda_t, const SampleBatch& batch,
               StepCounters* counters) {
  require_positive(gamma, "gamma");
  require_positive(beta, "beta");
  Vec g = stochastic_gradient_G(p, state.y, batch);
  if (counters) counters->grad_draws += static_cast<long>(batch.indices.size());

  Vec y_new = state.y - (g + H_grad_y(p, state.x, state.y, lambda_t)) / beta;
  const Vec z_old = state.z;
  Vec x_new = prox_H(p, y_new, z_old, gamma, lambda_t);
  Vec u_new = p.prox_F(2.0 * x_new - z_old, gamma);
  if (counters) counters->prox_calls += 1;
  Vec z_new = z_old + (u_new - x_new);

  state.z_prev = z_old;
  state.y = std::move(y_new);
  state.x = std::move(x_new);
  state.u = std::move(u_new);
  state.z = std::move(z_new);
  state.t += 1;
  check_step_finite(state);
}

void stam_quantized_step(const ProblemInstance& p, SolverState& state, double gamma,
                         double beta, double lambda_t, const Vec& loss_grad,
                         StepCounters* counters) {
  require_positive(gamma, "gamma");
  require_positive(beta, "beta");
  if (!p.quant || !p.coupling)
    throw std::invalid_argument(
        "stam_quantized_step needs a quantized problem with quadratic coupling");
  const double lam = effective_lambda(p, lambda_t);

  // (y, x, u, z) = (W, U, V, X); the loss pull couples to the quantized V.
  Vec W_new = state.y;
  W_new.head(p.dim_x) -= (lam / beta) * (state.y.head(p.dim_x) - state.u);
  W_new -= loss_grad / beta;

  const Vec z_old = state.z;
  const double gl = gamma * lam;
  Vec U_new = (gl * W_new.head(p.dim_x) + z_old) / (gl + 1.0);
  Vec V_new = project_Q(2.0 * U_new - z_old, *p.quant).dense;
  if (counters) counters->prox_calls += 1;
  Vec z_new = z_old + (V_new - U_new);

  state.z_prev = z_old;
  state.y = std::move(W_new);
  state.x = std::move(U_new);
  state.u = std::move(V_new);
  state.z = std::move(z_new);
  state.t += 1;
  check_step_finite(state);
}

void psgd_step(const ProblemInstance& p, BaselineState& state, double gamma,
               double weight_decay, const SampleBatch& batch, StepCounters* counters) {
  baseline_gradient_step(p, state, state.U, gamma, weight_decay, batch, counters);
  state.W = project_eval(p, state.U);
  if (counters && p.quant) counters->prox_calls += 1;
  state.t += 1;
}

void bc_step(const ProblemInstance& p, BaselineState& state, double gamma,
             double weight_decay, const SampleBatch& batch, StepCounters* counters) {
  baseline_gradient_step(p, state, state.W, gamma, weight_decay, batch, counters);
  state.W = project_eval(p, state.U);
  if (counters && p.quant) counters->prox_calls += 1;
  state.t += 1;
}

void br_step(const ProblemInstance& p, BaselineState& state, const BrParams& br,
             long epoch, double gamma, double weight_decay, const SampleBatch& batch,
             StepCounters* counters) {
  if (epoch < 0) throw std::invalid_argument("br_step: negative epoch");
  baseline_gradient_step(p, state, state.W, gamma, weight_decay, batch, counters);
  if (epoch < br.phase_switch_K) {
    state.W = blend_eval(p, state.U, state.lambda_br);
    state.lambda_br *= br.rho;
  } else {
    state.W = project_eval(p, state.U);
  }
  if (counters && p.quant) counters->prox_calls += 1;
  state.t += 1;
}

void float_step(const ProblemInstance& p, BaselineState& state, double gamma,
                double weight_decay, const SampleBatch& batch, StepCounters* counters) {
  baseline_gradient_step(p, state, state.U, gamma, weight_decay, batch, counters);
  state.W = state.U;
  state.t += 1;
}

double gamma_threshold(double l, double L2_star) {
  if (L2_star < 0.0) throw std::invalid_argument("gamma_threshold: L2_star must be >= 0");
  const double b = 10.0 * (l + L2_star) + 4.0;
  if (L2_star == 0.0) {
    if (b <= 0.0) throw std::domain_error("gamma_threshold: no valid gamma (K1 never positive)");
    return 1.0 / b;
  }
  const double disc = std::sqrt(b * b + 20.0 * L2_star * L2_star);
  const double root = 2.0 / (b + disc);
  if (!(root > 0.0) || !std::isfinite(root))
    throw std::domain_error("gamma_threshold: no valid gamma (K1 never positive)");
  return root;
}

namespace {

// Serves minibatches either as independent b-nice draws or as chunks of a
// per-pass shuffled permutation. In shuffle mode epoch() counts completed
// passes exactly.
class BatchProvider {
 public:
  BatchProvider(int N, int b, SamplingMode mode, RngStream* rng)
      : N_(N), b_(b), mode_(mode), rng_(rng) {
    if (mode_ == SamplingMode::kEpochShuffle) {
      order_.resize(N_);
      std::iota(order_.begin(), order_.end(), 0);
    }
  }

  SampleBatch next() {
    if (b_ == N_ && mode_ == SamplingMode::kBNice) {
      SampleBatch full;
      full.N = N_;
      full.b = N_;
      full.indices.resize(N_);
      std::iota(full.indices.begin(), full.indices.end(), 0);
      return full;
    }
    if (mode_ == SamplingMode::kBNice) return draw_b_nice(N_, b_, *rng_);

    if (pos_ == 0) shuffle();
    const int take = std::min(b_, N_ - pos_);
    SampleBatch batch;
    batch.N = N_;
    batch.b = take;
    batch.indices.assign(order_.begin() + pos_, order_.begin() + pos_ + take);
    std::sort(batch.indices.begin(), batch.indices.end());
    pos_ += take;
    if (pos_ >= N_) {
      pos_ = 0;
      ++passes_;
    }
    return batch;
  }

  long passes() const { return passes_; }

 private:
  void shuffle() {
    for (int j = N_ - 1; j > 0; --j) {
      const int k = static_cast<int>(rng_->uniform_below(j + 1));
      std::swap(order_[j], order_[k]);
    }
  }

  int N_, b_;
  SamplingMode mode_;
  RngStream* rng_;
  std::vector<int> order_;
  int pos_ = 0;
  long passes_ = 0;
};

std::optional<double> eval_metric(const std::function<double(const Vec&)>& metric,
                                  const Vec& point) {
  if (!metric) return std::nullopt;
  return metric(point);
}

void better(double candidate, double& best) {
  if (std::isnan(best) || candidate > best) best = candidate;
}

}  // namespace

RunResult run_solver(const ProblemInstance& p, Algo algo, const SolverParams& params,
                     const Vec& y0, RngStream rng, TraceSink* sink) {
  const int N = p.n_components;
  const int b = params.batch_b == 0 ? N : params.batch_b;
  if (b < 1 || b > N)
    throw std::invalid_argument("run_solver: batch_b must lie in [1, N]");
  if (params.T < 0) throw std::invalid_argument("run_solver: negative T");
  const long log_every = std::max<long>(1, params.log_every);

  const bool count_passes =
      params.epoch_mode == EpochMode::kDatasetPass ||
      (params.epoch_mode == EpochMode::kAuto && p.dataset_backed);

  BatchProvider batches(N, b, params.sampling, &rng);

  RunResult result;
  result.counters = {};

  SolverState state = make_initial_state(p, y0);
  BaselineState bl;
  if (algo != Algo::kStam) {
    bl.U = y0;
    bl.W = algo == Algo::kFloat ? y0 : project_eval(p, y0);
    bl.lambda_br = params.br.lambda0;
  }

  if (algo == Algo::kStam) {
    const ThresholdReport th = splitting_constants(params.gamma.at(0), p.smoothness);
    result.k1_satisfied_at_start = th.satisfied;
    if (!th.satisfied)
      std::fprintf(stderr,
                   "warning: K1 = %.6g <= 0 at gamma = %.6g (threshold %.6g); "
                   "descent guarantee does not apply\n",
                   th.K1, params.gamma.at(0), th.gamma_max);
  }

  auto epoch_of = [&](long t) -> long {
    if (!count_passes) return t;
    if (params.sampling == SamplingMode::kEpochShuffle) return batches.passes();
    return (t * static_cast<long>(b)) / N;
  };

  auto emit = [&](long t, long epoch, double gamma_t, double beta_t, double lambda_t) {
    TraceRecord rec;
    rec.t = t;
    rec.epoch = epoch;
    rec.gamma = gamma_t;
    rec.beta = beta_t;
    rec.lambda = lambda_t;
    if (algo == Algo::kStam) {
      const StationarityRecord st = stationarity(p, state, gamma_t, lambda_t);
      rec.eta = st.eta;
      rec.dist_sq_proxy = st.dist_sq_proxy;
      rec.combined = st.combined;
      rec.z_residual = st.z_residual;
      rec.merit = merit_value(p, state, gamma_t);
      rec.objective =
          value_G(p, state.y) + H_value(p, state.x, state.y, lambda_t) + p.value_F(state.u);
      if (p.train_accuracy || p.test_accuracy) {
        Vec y_eval = state.y;
        y_eval.head(p.dim_x) = state.u;
        rec.train_accuracy = eval_metric(p.train_accuracy, y_eval);
        rec.test_accuracy = eval_metric(p.test_accuracy, y_eval);
      }
    } else {
      // Single-block methods: eta at the evaluation iterate, the quantization
      // gap of the float iterate as the constraint residual.
      rec.eta = full_gradient_G(p, bl.W).squaredNorm();
      if (p.quant) {
        const double d = distance_to_Q(bl.U.head(p.dim_x), *p.quant);
        rec.dist_sq_proxy = d * d;
      }
      rec.combined = rec.eta + rec.dist_sq_proxy;
      rec.objective = value_G(p, bl.W);
      rec.lambda = algo == Algo::kBr ? bl.lambda_br : 0.0;
      rec.beta = 0.0;
      rec.train_accuracy = eval_metric(p.train_accuracy, bl.W);
      rec.test_accuracy = eval_metric(p.test_accuracy, bl.W);
    }
    if (sink) sink->emit(rec);
    if (std::isfinite(rec.combined) && rec.combined < result.best_combined)
      result.best_combined = rec.combined;
    if (rec.train_accuracy) better(*rec.train_accuracy, result.best_train_accuracy);
    if (rec.test_accuracy) better(*rec.test_accuracy, result.best_test_accuracy);
  };

  try {
    for (long t = 0; t < params.T; ++t) {
      const long epoch = epoch_of(t);
      const int e = static_cast<int>(epoch);
      const double gamma_t = params.gamma.at(e);
      const double lambda_t =
          params.lambda ? params.lambda->at(e)
                        : (p.coupling ? p.coupling->lambda : kNaN);
      double beta_t = 0.0;
      SampleBatch batch = batches.next();
      switch (algo) {
        case Algo::kStam:
          beta_t = params.beta.at(e);
          stam_step(p, state, gamma_t, beta_t, lambda_t, batch, &result.counters);
          break;
        case Algo::kPsgd:
          psgd_step(p, bl, gamma_t, params.weight_decay, batch, &result.counters);
          break;
        case Algo::kBc:
          bc_step(p, bl, gamma_t, params.weight_decay, batch, &result.counters);
          break;
        case Algo::kBr:
          br_step(p, bl, params.br, epoch, gamma_t, params.weight_decay, batch,
                  &result.counters);
          break;
        case Algo::kFloat:
          float_step(p, bl, gamma_t, params.weight_decay, batch, &result.counters);
          break;
      }
      result.iterations = t + 1;
      if ((t + 1) % log_every == 0 || t + 1 == params.T)
        emit(t + 1, epoch, gamma_t, beta_t, lambda_t);
    }
  } catch (...) {
    if (sink) sink->flush();
    throw;
  }
  if (sink) sink->flush();

  if (algo == Algo::kStam) {
    result.state = std::move(state);
  } else {
    result.state.y = bl.U;
    result.state.x = bl.W.head(p.dim_x);
    result.state.u = result.state.x;
    result.state.z = Vec::Zero(p.dim_x);
    result.state.z_prev = result.state.z;
    result.state.t = bl.t;
  }
  return result;
}

}  // namespace stam
