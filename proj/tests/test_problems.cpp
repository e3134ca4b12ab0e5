#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "stam/problems.hpp"
#include "stam/sampling.hpp"

using namespace stam;
using doctest::Approx;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

ProblemInstance two_point_ls(double lambda = 0.0) {
  Mat A(2, 1);
  A << 1.0, 1.0;
  Vec b(2);
  b << 0.0, 2.0;
  return make_least_squares_from(A, b, lambda);
}

}  // namespace

TEST_CASE("objective worked values on the scalar toy") {
  const ProblemInstance p = make_scalar_toy(4.0);
  Vec y4(1), x4(1), y0(1), x0(1);
  y4 << 4.0;
  x4 << 4.0;
  y0 << 0.0;
  x0 << 0.0;
  CHECK(evaluate_phi(p, y4, x4) == 0.0);
  CHECK(evaluate_phi(p, y0, x0) == 8.0);
}

TEST_CASE("objective is +inf outside the quantized constraint") {
  RngStream rng(1, 0);
  LeastSquaresOptions opts;
  opts.quantized = true;
  const ProblemInstance p = make_least_squares(4, 2, 1.0, 0.0, rng, opts);
  Vec y = Vec::Zero(2);
  Vec x(2);
  x << 1.0, 2.0;  // |1| != |2|, not in Q
  CHECK(evaluate_phi(p, y, x) == kInf);
  x << 2.0, -2.0;
  CHECK(std::isfinite(evaluate_phi(p, y, x)));
}

TEST_CASE("full gradient worked values") {
  const ProblemInstance p = two_point_ls();
  Vec y(1);
  y << 1.0;
  CHECK(full_gradient_G(p, y)[0] == 0.0);  // (1-0 + 1-2)/2

  // N = 1: the mean is the single component gradient.
  Mat A(1, 2);
  A << 1.0, 2.0;
  Vec b(1);
  b << 3.0;
  const ProblemInstance single = make_least_squares_from(A, b, 0.0);
  Vec y2(2);
  y2 << 0.5, -0.5;
  CHECK(full_gradient_G(single, y2) == single.component_gradient(0, y2));
}

TEST_CASE("full gradient is the fixed-order mean of component gradients") {
  RngStream rng(7, 0);
  const ProblemInstance p = make_least_squares(5, 3, 1.0, 0.5, rng);
  Vec y(3);
  y << 0.3, -1.2, 2.0;
  Vec sum = Vec::Zero(3);
  for (int i = 0; i < 5; ++i) sum += p.component_gradient(i, y);
  CHECK(full_gradient_G(p, y) == sum / 5.0);
}

TEST_CASE("least squares declares exact per-component curvature") {
  RngStream rng(2, 0);
  const ProblemInstance p = make_least_squares(6, 4, 1.3, 0.5, rng);
  REQUIRE(p.smoothness.L1_components.size() == 6);
  // L1^i = ||a_i||^2: the gradient of G_i is (a_i'y - b_i) a_i, so moving
  // y from 0 to e_j changes grad[j] by exactly a_i[j]^2.
  Vec y0 = Vec::Zero(4);
  for (int i = 0; i < 6; ++i) {
    Vec sq(4);
    for (int j = 0; j < 4; ++j) {
      Vec e = Vec::Zero(4);
      e[j] = 1.0;
      sq[j] = p.component_gradient(i, e)[j] - p.component_gradient(i, y0)[j];
    }
    CHECK(p.smoothness.L1_components[i] == Approx(sq.sum()).epsilon(1e-12));
  }
  CHECK(p.smoothness.max_L1_component() ==
        *std::max_element(p.smoothness.L1_components.begin(),
                          p.smoothness.L1_components.end()));
  CHECK_FALSE(p.smoothness.L1_is_estimate);
}

TEST_CASE("zero coupling weight turns off H") {
  const ProblemInstance p = two_point_ls(0.0);
  Vec x(1), y(1);
  x << 3.0;
  y << -2.0;
  CHECK(H_value(p, x, y) == 0.0);
  CHECK(H_grad_x(p, x, y)[0] == 0.0);
  CHECK(H_grad_y(p, x, y)[0] == 0.0);
}

TEST_CASE("quadratic coupling values and the per-epoch override") {
  const ProblemInstance p = two_point_ls(2.0);
  Vec x(1), y(1);
  x << 3.0;
  y << 1.0;
  CHECK(H_value(p, x, y) == Approx(2.0 / 2.0 * 4.0));      // lambda/2 (x-y)^2
  CHECK(H_grad_x(p, x, y)[0] == Approx(2.0 * 2.0));        // lambda (x-y)
  CHECK(H_grad_y(p, x, y)[0] == Approx(-4.0));
  CHECK(H_value(p, x, y, 5.0) == Approx(10.0));            // override lambda_t
  CHECK(effective_lambda(p, kNaN) == 2.0);
  CHECK(effective_lambda(p, 5.0) == 5.0);
}

TEST_CASE("least squares GH_inf is the exact minimum of G") {
  RngStream rng(4, 0);
  const ProblemInstance p = make_least_squares(8, 3, 1.0, 0.7, rng);
  // At the normal-equations solution the gradient vanishes and G attains
  // GH_inf (H contributes 0 at x = y).
  // Recover the minimizer by gradient descent as an independent oracle.
  Vec y = Vec::Zero(3);
  for (int it = 0; it < 20000; ++it) y -= 0.5 / p.smoothness.L1 * full_gradient_G(p, y);
  CHECK(full_gradient_G(p, y).norm() < 1e-10);
  CHECK(value_G(p, y) == Approx(p.smoothness.GH_inf).epsilon(1e-10));
  CHECK(p.smoothness.G_inf == p.smoothness.GH_inf);
  CHECK(p.smoothness.H_inf == 0.0);
  for (double gi : p.smoothness.Gi_inf) CHECK(gi == 0.0);
}

TEST_CASE("logistic loss at the origin") {
  RngStream rng(5, 0);
  const ProblemInstance p = make_logistic(6, 4, 0.8, rng);
  const Vec y0 = Vec::Zero(4);
  for (int i = 0; i < 6; ++i) CHECK(p.component_value(i, y0) == Approx(std::log(2.0)));

  // gradient at 0 is -(1/N) sum c_i a_i / 2; recover c_i a_i from the
  // component gradients at 0, which equal -c_i a_i / 2.
  Vec expected = Vec::Zero(4);
  for (int i = 0; i < 6; ++i) expected += p.component_gradient(i, y0);
  expected /= 6.0;
  CHECK((full_gradient_G(p, y0) - expected).norm() == 0.0);
}

TEST_CASE("logistic loss is finite and monotone at extreme margins") {
  Mat A(1, 1);
  A << 1.0;
  IVec c(1);
  c << 1;
  const ProblemInstance p = make_logistic_from(A, c, 0.0);
  Vec big(1), neg(1);
  big << 1e4;
  neg << -1e4;
  CHECK(p.component_value(0, big) == 0.0);               // exp(-1e4) underflows
  CHECK(p.component_value(0, neg) == Approx(1e4));       // log(1+e^t) ~ t
  CHECK(std::isfinite(p.component_gradient(0, big)[0]));
  CHECK(std::isfinite(p.component_gradient(0, neg)[0]));
  CHECK(p.component_gradient(0, neg)[0] == Approx(-1.0));  // saturated sigmoid
  CHECK(p.smoothness.L1_components[0] == Approx(0.25));    // ||a||^2 / 4
}

TEST_CASE("logistic labels must be -1 or +1") {
  Mat A(2, 1);
  A << 1.0, 2.0;
  IVec c(2);
  c << 1, 0;
  CHECK_THROWS_AS(make_logistic_from(A, c, 0.0), std::invalid_argument);
}

TEST_CASE("blobs are reproducible and separated as requested") {
  RngStream rng1(11, 0), rng2(11, 0);
  const Dataset a = make_blobs(50, 2, 2, 8.0, rng1);
  const Dataset b = make_blobs(50, 2, 2, 8.0, rng2);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  REQUIRE(a.n() == 100);
  CHECK(a.dim() == 2);

  // class means concentrate near (-4, 0) and (+4, 0)
  Vec mean0 = Vec::Zero(2), mean1 = Vec::Zero(2);
  for (int i = 0; i < a.n(); ++i) {
    if (a.labels[i] == 0)
      mean0 += a.features.row(i).transpose();
    else
      mean1 += a.features.row(i).transpose();
  }
  mean0 /= 50.0;
  mean1 /= 50.0;
  CHECK((mean1 - mean0).norm() == Approx(8.0).epsilon(0.15));

  // classes interleave row by row
  for (int i = 0; i < 10; ++i) CHECK(a.labels[i] == i % 2);
}

TEST_CASE("multiclass blobs have equidistant means") {
  RngStream rng(12, 0);
  const int k = 3;
  const Dataset d = make_blobs(2000, k, 3, 6.0, rng);
  Mat means = Mat::Zero(k, 3);
  for (int i = 0; i < d.n(); ++i) means.row(d.labels[i]) += d.features.row(i);
  means /= 2000.0;
  for (int c1 = 0; c1 < k; ++c1)
    for (int c2 = c1 + 1; c2 < k; ++c2)
      CHECK((means.row(c1) - means.row(c2)).norm() == Approx(6.0).epsilon(0.05));

  RngStream rng2(12, 0);
  CHECK_THROWS_AS(make_blobs(10, 3, 2, 6.0, rng2), std::invalid_argument);
}

TEST_CASE("zero separation collapses the class means") {
  RngStream rng(13, 0);
  const Dataset d = make_blobs(4000, 2, 2, 0.0, rng);
  Vec mean0 = Vec::Zero(2), mean1 = Vec::Zero(2);
  for (int i = 0; i < d.n(); ++i) {
    if (d.labels[i] == 0)
      mean0 += d.features.row(i).transpose();
    else
      mean1 += d.features.row(i).transpose();
  }
  CHECK((mean1 / 4000.0 - mean0 / 4000.0).norm() < 0.1);
}

TEST_CASE("a linear fit separates well-separated blobs") {
  RngStream rng(14, 0);
  const Dataset d = make_blobs(100, 2, 2, 8.0, rng);
  IVec c(d.n());
  for (int i = 0; i < d.n(); ++i) c[i] = 2 * d.labels[i] - 1;
  const ProblemInstance p = make_logistic_from(d.features, c, 0.0);
  Vec y = Vec::Zero(2);
  for (int it = 0; it < 500; ++it) y -= 1.0 / p.smoothness.L1 * full_gradient_G(p, y);
  int correct = 0;
  for (int i = 0; i < d.n(); ++i) {
    const double score = d.features.row(i).dot(y);
    if ((score >= 0.0 ? 1 : -1) == c[i]) ++correct;
  }
  CHECK(correct >= 0.99 * d.n());
}

TEST_CASE("seeded split has deterministic sizes and preserves rows") {
  RngStream rng(15, 0);
  const Dataset d = make_blobs(25, 2, 2, 4.0, rng);
  RngStream s1(16, 0), s2(16, 0);
  const SplitDataset a = split_dataset(d, 0.8, s1);
  const SplitDataset b = split_dataset(d, 0.8, s2);
  CHECK(a.train.n() == 40);  // ceil(0.8 * 50)
  CHECK(a.test.n() == 10);
  CHECK(a.train.features == b.train.features);
  CHECK(a.test.labels == b.test.labels);

  // every original row appears exactly once across the two parts
  std::multiset<double> original, recombined;
  for (int i = 0; i < d.n(); ++i) original.insert(d.features(i, 0));
  for (int i = 0; i < a.train.n(); ++i) recombined.insert(a.train.features(i, 0));
  for (int i = 0; i < a.test.n(); ++i) recombined.insert(a.test.features(i, 0));
  CHECK(original == recombined);

  CHECK_THROWS_AS(split_dataset(d, 1.5, s1), std::invalid_argument);
}

TEST_CASE("csv: small classification file parses") {
  const std::string path = write_temp("stam_test_ok.csv",
                                      "f1,f2,label\n"
                                      "1.5,2.5,0\n"
                                      "3.0,4.0,1\n"
                                      "-1.0,0.5,1\n");
  const Dataset d = load_csv_dataset(path, "label");
  REQUIRE(d.n() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.is_classification);
  CHECK(d.features(0, 0) == 1.5);
  CHECK(d.features(2, 1) == 0.5);
  CHECK(d.labels[0] == 0);
  CHECK(d.labels[1] == 1);
}

TEST_CASE("csv: label column can sit anywhere and hold real targets") {
  const std::string path = write_temp("stam_test_reg.csv",
                                      "target,f1\n"
                                      "0.25,1.0\n"
                                      "0.75,2.0\n");
  const Dataset d = load_csv_dataset(path, "target");
  CHECK_FALSE(d.is_classification);
  REQUIRE(d.n() == 2);
  CHECK(d.dim() == 1);
  CHECK(d.targets[1] == 0.75);
  CHECK(d.features(1, 0) == 2.0);
}

TEST_CASE("csv: errors carry the offending line") {
  const std::string bad_cell = write_temp("stam_test_badcell.csv",
                                          "f1,label\n"
                                          "1.0,0\n"
                                          "oops,1\n");
  try {
    load_csv_dataset(bad_cell, "label");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("non-numeric") != std::string::npos);
  }

  const std::string bad_count = write_temp("stam_test_badcount.csv",
                                           "f1,f2,label\n"
                                           "1.0,2.0,0\n"
                                           "1.0,1\n");
  try {
    load_csv_dataset(bad_count, "label");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("csv: structural errors") {
  const std::string empty = write_temp("stam_test_empty.csv", "f1,label\n");
  CHECK_THROWS_AS(load_csv_dataset(empty, "label"), ConfigError);

  const std::string ok = write_temp("stam_test_col.csv", "f1,label\n1,0\n");
  CHECK_THROWS_AS(load_csv_dataset(ok, "not_there"), ConfigError);
  CHECK_THROWS_AS(load_csv_dataset("/nonexistent/really_not_here.csv", "label"),
                  ConfigError);
}

TEST_CASE("scalar toy shape and calculus") {
  const ProblemInstance p = make_scalar_toy(4.0, 1.0);
  CHECK(p.n_components == 1);
  CHECK(p.dim_y == 1);
  CHECK(p.dim_x == 1);
  Vec y(1);
  y << 1.0;
  CHECK(p.component_value(0, y) == Approx(4.5));          // 0.5 (1-4)^2
  CHECK(p.component_gradient(0, y)[0] == Approx(-3.0));
  Vec v(1);
  v << 9.0;
  CHECK(p.prox_F(v, 0.5) == v);                           // F == 0
  CHECK(p.value_F(v) == 0.0);
  CHECK(p.smoothness.L1 == 1.0);
}
