#pragma once

#include <string>

#include "stam/problem.hpp"
#include "stam/rng.hpp"

namespace stam {

// Feature matrix plus either integer class ids or real regression targets.
struct Dataset {
  Mat features;  // n x d
  IVec labels;
  Vec targets;
  bool is_classification = true;

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

// Seeded shuffle, then the first ceil(fraction * n) rows become train.
SplitDataset split_dataset(const Dataset& data, double train_fraction, RngStream& rng);

// k Gaussian blobs with unit covariance whose means are mutually `separation`
// apart (scaled simplex corners; needs dim >= n_classes when n_classes > 2,
// dim >= 1 for two classes). Samples interleave classes.
Dataset make_blobs(int n_per_class, int n_classes, int dim, double separation,
                   RngStream& rng);

// Header row required; label_column names the column holding class ids (all
// integral) or regression targets. Malformed cells and missing columns raise
// ConfigError with the offending line number.
Dataset load_csv_dataset(const std::string& path, const std::string& label_column);

struct LeastSquaresOptions {
  bool quantized = false;  // F = indicator of Q instead of F == 0
  int n_layers = 1;
};

// G_i(y) = 1/2 (a_i'y - b_i)^2 with a_i, y_true standard normal and
// b = A y_true + noise * eps. H is the quadratic coupling with weight lambda
// on all d coordinates. GH_inf is the exact minimum of G (normal equations).
ProblemInstance make_least_squares(int N, int d, double lambda, double noise,
                                   RngStream& rng, const LeastSquaresOptions& opts = {});

// Same problem from explicit data (rows of A, targets b).
ProblemInstance make_least_squares_from(const Mat& A, const Vec& b, double lambda,
                                        const LeastSquaresOptions& opts = {});

// G_i(y) = log(1 + exp(-c_i a_i'y)), labels c_i = sign(a_i' w*) from a hidden
// hyperplane. Infima are the generic lower bound 0.
ProblemInstance make_logistic(int N, int d, double lambda, RngStream& rng,
                              const LeastSquaresOptions& opts = {});

ProblemInstance make_logistic_from(const Mat& A, const IVec& c, double lambda,
                                   const LeastSquaresOptions& opts = {});

// Scalar smooth toy: G(y) = 1/2 (y - target)^2, H = (lambda/2)(x - y)^2,
// F == 0. The standard single-variable exercise bed for the solvers.
ProblemInstance make_scalar_toy(double target, double lambda = 1.0);

}  // namespace stam
