#include "stam/quantization.hpp"

#include <cmath>

namespace stam {

int QuantizedSpace::dim() const {
  int n = 0;
  for (const Layer& l : layers) n += l.length;
  return n;
}

void QuantizedSpace::validate() const {
  if (layers.empty()) throw std::invalid_argument("QuantizedSpace: no layers");
  int expect = 0;
  for (const Layer& l : layers) {
    if (l.length < 1) throw std::invalid_argument("QuantizedSpace: empty layer");
    if (l.offset != expect)
      throw std::invalid_argument("QuantizedSpace: layers must be contiguous and disjoint");
    expect += l.length;
  }
}

QuantizedSpace QuantizedSpace::single(int dim) {
  QuantizedSpace s;
  s.layers.push_back({0, dim});
  s.validate();
  return s;
}

QuantizedSpace QuantizedSpace::even(int dim, int n_layers) {
  if (n_layers < 1 || n_layers > dim)
    throw std::invalid_argument("QuantizedSpace::even: need 1 <= n_layers <= dim");
  QuantizedSpace s;
  int offset = 0;
  for (int i = 0; i < n_layers; ++i) {
    const int len = dim / n_layers + (i < dim % n_layers ? 1 : 0);
    s.layers.push_back({offset, len});
    offset += len;
  }
  s.validate();
  return s;
}

QuantizedPoint project_Q(const Vec& U, const QuantizedSpace& space) {
  if (U.size() != space.dim())
    throw std::invalid_argument("project_Q: vector length does not match space");
  QuantizedPoint q;
  q.signs.resize(U.size());
  q.dense.resize(U.size());
  q.scales.reserve(space.layers.size());
  for (const auto& layer : space.layers) {
    double abs_sum = 0.0;
    for (int j = layer.offset; j < layer.offset + layer.length; ++j)
      abs_sum += std::abs(U[j]);
    const double s = abs_sum / layer.length;
    q.scales.push_back(s);
    for (int j = layer.offset; j < layer.offset + layer.length; ++j) {
      q.signs[j] = U[j] >= 0.0 ? 1 : -1;
      q.dense[j] = q.signs[j] * s;
    }
  }
  return q;
}

double distance_to_Q(const Vec& U, const QuantizedSpace& space) {
  return (U - project_Q(U, space).dense).norm();
}

Vec relaxed_blend(const Vec& U, const QuantizedSpace& space, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("relaxed_blend: lambda must be >= 0");
  return (lambda * project_Q(U, space).dense + U) / (lambda + 1.0);
}

bool is_in_Q(const Vec& x, const QuantizedSpace& space) {
  if (x.size() != space.dim()) return false;
  for (const auto& layer : space.layers) {
    const double mag = std::abs(x[layer.offset]);
    for (int j = layer.offset + 1; j < layer.offset + layer.length; ++j)
      if (std::abs(x[j]) != mag) return false;
  }
  return true;
}

}  // namespace stam
