#include "stam/mlp.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace stam {

std::vector<int> MlpSpec::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_classes);
  return sizes;
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWMap = Eigen::Map<const RowMat>;
using ConstBMap = Eigen::Map<const Vec>;

}  // namespace

MlpModel::MlpModel(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.input_dim < 1 || spec_.n_classes < 2)
    throw std::invalid_argument("MlpModel: need input_dim >= 1 and n_classes >= 2");
  for (int h : spec_.hidden)
    if (h < 1) throw std::invalid_argument("MlpModel: hidden sizes must be >= 1");
  const auto sizes = spec_.layer_sizes();
  int off = 0;
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    w_offset_.push_back(off);
    off += sizes[k + 1] * sizes[k];
  }
  n_weights_ = off;
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    b_offset_.push_back(off);
    off += sizes[k + 1];
  }
  n_biases_ = off - n_weights_;
}

QuantizedSpace MlpModel::weight_space() const {
  QuantizedSpace space;
  const auto sizes = spec_.layer_sizes();
  for (size_t k = 0; k + 1 < sizes.size(); ++k)
    space.layers.push_back({w_offset_[k], sizes[k + 1] * sizes[k]});
  space.validate();
  return space;
}

Vec MlpModel::logits(const Vec& params, const Vec& features) const {
  if (params.size() != dim()) throw std::invalid_argument("MlpModel: bad parameter size");
  if (features.size() != spec_.input_dim)
    throw std::invalid_argument("MlpModel: bad feature size");
  const auto sizes = spec_.layer_sizes();
  Vec a = features;
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    ConstWMap W(params.data() + w_offset_[k], sizes[k + 1], sizes[k]);
    ConstBMap b(params.data() + b_offset_[k], sizes[k + 1]);
    Vec z = W * a + b;
    if (k + 2 < sizes.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

double MlpModel::example_loss(const Vec& params, const Vec& features, int label) const {
  if (label < 0 || label >= spec_.n_classes)
    throw std::invalid_argument("MlpModel: label out of range");
  const Vec z = logits(params, features);
  if (spec_.loss == MlpLoss::kSquaredError) {
    Vec r = z;
    r[label] -= 1.0;
    return 0.5 * r.squaredNorm();
  }
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return lse - z[label];
}

Vec MlpModel::example_gradient(const Vec& params, const Vec& features, int label) const {
  if (label < 0 || label >= spec_.n_classes)
    throw std::invalid_argument("MlpModel: label out of range");
  const auto sizes = spec_.layer_sizes();
  const int K = static_cast<int>(sizes.size()) - 1;

  // Forward pass keeping activations; pre[k] holds the pre-activation of
  // layer k so the ReLU mask can be recovered on the way back.
  std::vector<Vec> act(K + 1);
  std::vector<Vec> pre(K);
  act[0] = features;
  for (int k = 0; k < K; ++k) {
    ConstWMap W(params.data() + w_offset_[k], sizes[k + 1], sizes[k]);
    ConstBMap b(params.data() + b_offset_[k], sizes[k + 1]);
    pre[k] = W * act[k] + b;
    act[k + 1] = (k + 1 < K) ? pre[k].cwiseMax(0.0) : pre[k];
  }

  const Vec& z = act[K];
  Vec delta;
  if (spec_.loss == MlpLoss::kSquaredError) {
    delta = z;
  } else {
    const double m = z.maxCoeff();
    delta = (z.array() - m).exp();
    delta /= delta.sum();
  }
  delta[label] -= 1.0;

  Vec grad = Vec::Zero(dim());
  for (int k = K - 1; k >= 0; --k) {
    Eigen::Map<RowMat> gW(grad.data() + w_offset_[k], sizes[k + 1], sizes[k]);
    gW = delta * act[k].transpose();
    grad.segment(b_offset_[k], sizes[k + 1]) = delta;
    if (k > 0) {
      ConstWMap W(params.data() + w_offset_[k], sizes[k + 1], sizes[k]);
      Vec back = W.transpose() * delta;
      delta = (pre[k - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return grad;
}

int MlpModel::predict(const Vec& params, const Vec& features) const {
  const Vec z = logits(params, features);
  int best = 0;
  for (int j = 1; j < z.size(); ++j)
    if (z[j] > z[best]) best = j;
  return best;
}

double MlpModel::accuracy(const Vec& params, const Dataset& data) const {
  if (!data.is_classification)
    throw std::invalid_argument("MlpModel::accuracy: regression dataset");
  if (data.n() == 0) return kNaN;
  int correct = 0;
  for (int i = 0; i < data.n(); ++i)
    if (predict(params, data.features.row(i)) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / data.n();
}

ProblemInstance make_mlp_problem(const MlpSpec& spec, const Dataset& train,
                                 const Dataset& test, const MlpProblemOptions& opts) {
  if (!train.is_classification || train.n() == 0)
    throw std::invalid_argument("make_mlp_problem: need a nonempty classification train set");
  if (train.dim() != spec.input_dim)
    throw std::invalid_argument("make_mlp_problem: train feature dim != input_dim");
  auto check_labels = [&](const Dataset& d) {
    for (int i = 0; i < d.n(); ++i)
      if (d.labels[i] < 0 || d.labels[i] >= spec.n_classes)
        throw std::invalid_argument("make_mlp_problem: label out of range");
  };
  check_labels(train);
  if (test.n() > 0) {
    if (!test.is_classification || test.dim() != spec.input_dim)
      throw std::invalid_argument("make_mlp_problem: test set layout mismatch");
    check_labels(test);
  }

  auto model = std::make_shared<MlpModel>(spec);
  auto train_p = std::make_shared<Dataset>(train);

  ProblemInstance p;
  p.name = "mlp";
  p.n_components = train.n();
  p.dim_y = model->dim();
  p.dim_x = model->n_weights();
  p.dataset_backed = true;

  p.component_value = [model, train_p](int i, const Vec& y) {
    return model->example_loss(y, train_p->features.row(i), train_p->labels[i]);
  };
  p.component_gradient = [model, train_p](int i, const Vec& y) {
    return model->example_gradient(y, train_p->features.row(i), train_p->labels[i]);
  };

  SmoothnessProfile& sp = p.smoothness;
  sp.L1 = opts.l1_estimate;
  sp.L1_components.assign(train.n(), opts.l1_estimate);
  sp.L1_is_estimate = true;
  sp.Gi_inf.assign(train.n(), 0.0);
  sp.G_inf = 0.0;
  sp.GH_inf = 0.0;  // both cross entropy and the coupling are nonnegative
  sp.H_inf = 0.0;
  sp.l = 0.0;

  if (opts.lambda < 0.0)
    throw std::invalid_argument("make_mlp_problem: coupling weight must be >= 0");
  p.coupling = QuadraticCoupling{opts.lambda};
  sp.L2_star = opts.lambda;
  sp.L3_star = opts.lambda;
  sp.L4_star = opts.lambda;
  sp.L5_star = opts.lambda;

  if (opts.quantized) {
    const QuantizedSpace space = model->weight_space();
    p.quant = space;
    p.value_F = [space](const Vec& x) { return is_in_Q(x, space) ? 0.0 : kInf; };
    p.prox_F = [space](const Vec& v, double) { return project_Q(v, space).dense; };
  } else {
    p.value_F = [](const Vec&) { return 0.0; };
    p.prox_F = [](const Vec& v, double) { return v; };
  }

  p.train_accuracy = [model, train_p](const Vec& y) { return model->accuracy(y, *train_p); };
  if (test.n() > 0) {
    auto test_p = std::make_shared<Dataset>(test);
    p.test_accuracy = [model, test_p](const Vec& y) { return model->accuracy(y, *test_p); };
  }
  return p;
}

}  // namespace stam
