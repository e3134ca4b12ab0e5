#pragma once

#include <vector>

#include "stam/problem.hpp"
#include "stam/problems.hpp"
#include "stam/quantization.hpp"
#include "stam/types.hpp"

namespace stam {

enum class MlpLoss { kSoftmaxCrossEntropy, kSquaredError };

// Fully connected ReLU network. The head is either softmax cross entropy or
// squared error against the one-hot target.
struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int n_classes = 2;
  MlpLoss loss = MlpLoss::kSoftmaxCrossEntropy;

  // [input_dim, hidden..., n_classes]
  std::vector<int> layer_sizes() const;
};

// Flat-parameter view of the network. Parameters are packed as the row-major
// entries of every weight matrix in order, followed by every bias vector:
//   [vec(W_1); ...; vec(W_K); b_1; ...; b_K].
// Putting the weights first lets the coupled block x address exactly the
// weight entries (biases stay full precision).
class MlpModel {
 public:
  explicit MlpModel(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  int n_weights() const { return n_weights_; }
  int n_biases() const { return n_biases_; }
  int dim() const { return n_weights_ + n_biases_; }

  // One quantization layer per weight matrix, covering [0, n_weights).
  QuantizedSpace weight_space() const;

  Vec logits(const Vec& params, const Vec& features) const;
  // Loss of one example: softmax cross entropy (with max subtraction) or
  // 0.5 * ||logits - onehot(label)||^2, selected by MlpSpec::loss.
  double example_loss(const Vec& params, const Vec& features, int label) const;
  // Gradient of example_loss in the flat layout; ReLU uses subgradient 0 at 0.
  Vec example_gradient(const Vec& params, const Vec& features, int label) const;
  // Argmax of the logits, ties resolved to the lowest class index.
  int predict(const Vec& params, const Vec& features) const;
  double accuracy(const Vec& params, const Dataset& data) const;

 private:
  MlpSpec spec_;
  std::vector<int> w_offset_, b_offset_;
  int n_weights_ = 0;
  int n_biases_ = 0;
};

struct MlpProblemOptions {
  double lambda = 1.0;       // coupling weight between x and the weight block
  double l1_estimate = 1.0;  // configured stand-in for the loss smoothness
  bool quantized = true;     // F = indicator of the per-matrix sign set
};

// Classification problem over the training set: G is the mean per-example
// cross entropy in the full parameter vector y, H couples an auxiliary block
// x to the weight entries of y, and F constrains x to the quantized set when
// requested. Accuracy callbacks evaluate the network at a full y vector.
ProblemInstance make_mlp_problem(const MlpSpec& spec, const Dataset& train,
                                 const Dataset& test, const MlpProblemOptions& opts);

}  // namespace stam
