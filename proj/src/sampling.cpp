#include "stam/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace stam {

namespace {

void check_Nb(int N, int b) {
  if (N < 1) throw std::invalid_argument("sampling: N must be >= 1");
  if (b < 1 || b > N)
    throw std::invalid_argument("sampling: need 1 <= b <= N, got b = " +
                                std::to_string(b) + ", N = " + std::to_string(N));
}

}  // namespace

double SampleBatch::weight_of(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i)
             ? static_cast<double>(N) / b
             : 0.0;
}

double SampleBatch::prob_of(int) const { return static_cast<double>(b) / N; }

std::vector<double> SampleBatch::weights() const {
  std::vector<double> v(N, 0.0);
  for (int i : indices) v[i] = static_cast<double>(N) / b;
  return v;
}

std::vector<double> SampleBatch::probs() const {
  return std::vector<double>(N, static_cast<double>(b) / N);
}

SampleBatch draw_b_nice(int N, int b, RngStream& rng) {
  check_Nb(N, b);
  std::vector<int> pool(N);
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < b; ++j) {
    const int k = j + static_cast<int>(rng.uniform_below(N - j));
    std::swap(pool[j], pool[k]);
  }
  SampleBatch batch;
  batch.N = N;
  batch.b = b;
  batch.indices.assign(pool.begin(), pool.begin() + b);
  std::sort(batch.indices.begin(), batch.indices.end());
  return batch;
}

std::vector<SampleBatch> enumerate_batches(int N, int b) {
  check_Nb(N, b);
  if (N > 20) throw std::invalid_argument("enumerate_batches: N too large for enumeration");
  std::vector<SampleBatch> all;
  std::vector<int> comb(b);
  std::iota(comb.begin(), comb.end(), 0);
  while (true) {
    SampleBatch batch;
    batch.N = N;
    batch.b = b;
    batch.indices = comb;
    all.push_back(std::move(batch));
    // next lexicographic combination
    int i = b - 1;
    while (i >= 0 && comb[i] == N - b + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < b; ++j) comb[j] = comb[j - 1] + 1;
  }
  return all;
}

Vec stochastic_gradient_G(const ProblemInstance& p, const Vec& y, const SampleBatch& batch) {
  if (batch.N != p.n_components)
    throw std::invalid_argument("stochastic_gradient_G: batch drawn for N = " +
                                std::to_string(batch.N) + " but problem has " +
                                std::to_string(p.n_components) + " components");
  Vec sum = Vec::Zero(p.dim_y);
  for (int i : batch.indices) {
    Vec g = p.component_gradient(i, y);
    if (!g.allFinite())
      throw NumericError("non-finite gradient in component " + std::to_string(i), -1, i);
    sum += g;
  }
  return sum / batch.b;
}

double second_moment_vi(int N, int b) {
  check_Nb(N, b);
  return static_cast<double>(N) / b;
}

}  // namespace stam
