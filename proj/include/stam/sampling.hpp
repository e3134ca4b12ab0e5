#pragma once

#include <vector>

#include "stam/problem.hpp"
#include "stam/rng.hpp"

namespace stam {

// One b-nice draw: a uniform size-b subset S of {0..N-1}. Member i carries
// sampling weight v_i = 1/p_i = N/b (0 off the subset), so the reweighted
// mean (1/N) sum_i v_i grad G_i is unbiased for the full gradient.
struct SampleBatch {
  std::vector<int> indices;  // ascending
  int N = 0;
  int b = 0;

  double weight_of(int i) const;      // v_i
  double prob_of(int) const;          // p_i = b/N, same for every i
  std::vector<double> weights() const;  // dense v, length N
  std::vector<double> probs() const;    // dense p, length N
};

// Uniform size-b subset without replacement (partial Fisher-Yates).
SampleBatch draw_b_nice(int N, int b, RngStream& rng);

// All size-b subsets of {0..N-1} in lexicographic order; refuses N > 20.
std::vector<SampleBatch> enumerate_batches(int N, int b);

// (1/N) sum_{i in S} v_i grad G_i(y) = (1/b) sum_{i in S} grad G_i(y).
// Equals full_gradient_G exactly (same summation order) when b = N.
Vec stochastic_gradient_G(const ProblemInstance& p, const Vec& y, const SampleBatch& batch);

// E[v_i^2] for b-nice sampling: N/b.
double second_moment_vi(int N, int b);

}  // namespace stam
