#pragma once

#include <vector>

#include "stam/types.hpp"

namespace stam {

// Partition of coordinate indices into contiguous layers. The feasible set Q
// consists of vectors whose entries inside each layer share one magnitude
// s_i >= 0 and differ only in sign.
struct QuantizedSpace {
  struct Layer {
    int offset = 0;
    int length = 0;
  };

  std::vector<Layer> layers;

  int dim() const;

  // Throws std::invalid_argument unless layers are nonempty, contiguous,
  // disjoint, and cover [0, dim) in order.
  void validate() const;

  static QuantizedSpace single(int dim);
  // dim split into n_layers contiguous blocks of near-equal length.
  static QuantizedSpace even(int dim, int n_layers);
};

struct QuantizedPoint {
  std::vector<double> scales;  // one s_i >= 0 per layer
  IVec signs;                  // +-1 per coordinate
  Vec dense;                   // scales expanded through signs
};

// Euclidean projection onto Q: per layer, s = mean(|U_j|) and sign(U_j) with
// ties at zero mapped to +1. Deterministic and total.
QuantizedPoint project_Q(const Vec& U, const QuantizedSpace& space);

// ||U - project_Q(U)||.
double distance_to_Q(const Vec& U, const QuantizedSpace& space);

// (lambda * project_Q(U).dense + U) / (lambda + 1); lambda = 0 returns U.
Vec relaxed_blend(const Vec& U, const QuantizedSpace& space, double lambda);

// Whether x lies in (the closure of) Q: equal magnitudes within each layer.
bool is_in_Q(const Vec& x, const QuantizedSpace& space);

}  // namespace stam
