#pragma once

#include <cstdint>

namespace stam {

// Counter-based generator (splitmix64 finalizer over an additive counter).
// A stream is fully determined by (seed, stream_id), so independent parts of
// an experiment can draw from disjoint streams without sharing state, and
// identical (seed, stream_id) reproduce the same sequence on every run.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01();

  // Uniform integer in [0, bound), exactly uniform via rejection.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal (Box-Muller; second value cached).
  double normal();

  // Child stream with its own id, independent of draws made so far.
  RngStream split(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stam
