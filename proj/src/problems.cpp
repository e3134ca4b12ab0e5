#include "stam/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>

namespace stam {

SplitDataset split_dataset(const Dataset& data, double train_fraction, RngStream& rng) {
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw std::invalid_argument("split_dataset: train_fraction must lie in [0, 1]");
  const int n = data.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int j = n - 1; j > 0; --j) {
    const int k = static_cast<int>(rng.uniform_below(j + 1));
    std::swap(order[j], order[k]);
  }
  const int n_train = static_cast<int>(std::ceil(train_fraction * n));

  auto take = [&](int from, int count) {
    Dataset part;
    part.is_classification = data.is_classification;
    part.features.resize(count, data.dim());
    if (data.is_classification)
      part.labels.resize(count);
    else
      part.targets.resize(count);
    for (int i = 0; i < count; ++i) {
      const int src = order[from + i];
      part.features.row(i) = data.features.row(src);
      if (data.is_classification)
        part.labels[i] = data.labels[src];
      else
        part.targets[i] = data.targets[src];
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

Dataset make_blobs(int n_per_class, int n_classes, int dim, double separation,
                   RngStream& rng) {
  if (n_per_class < 1 || n_classes < 2 || dim < 1)
    throw std::invalid_argument("make_blobs: need n_per_class >= 1, n_classes >= 2, dim >= 1");
  Mat means = Mat::Zero(n_classes, dim);
  if (n_classes == 2) {
    means(0, 0) = -separation / 2.0;
    means(1, 0) = separation / 2.0;
  } else {
    if (dim < n_classes)
      throw std::invalid_argument("make_blobs: dim must be >= n_classes for equidistant means");
    // Scaled simplex corners: pairwise distance is exactly `separation`.
    const double s = separation / std::sqrt(2.0);
    for (int c = 0; c < n_classes; ++c) {
      for (int j = 0; j < n_classes; ++j)
        means(c, j) = s * ((j == c ? 1.0 : 0.0) - 1.0 / n_classes);
    }
  }

  Dataset data;
  data.is_classification = true;
  const int n = n_per_class * n_classes;
  data.features.resize(n, dim);
  data.labels.resize(n);
  for (int i = 0; i < n_per_class; ++i) {
    for (int c = 0; c < n_classes; ++c) {
      const int row = i * n_classes + c;
      for (int j = 0; j < dim; ++j) data.features(row, j) = means(c, j) + rng.normal();
      data.labels[row] = c;
    }
  }
  return data;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    std::string field = comma == std::string::npos ? line.substr(start)
                                                   : line.substr(start, comma - start);
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string()
                                             : field.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, const std::string& path, int line_no) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell + "'",
                      line_no);
  return v;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file (no header row)");
  const auto header = split_fields(line);
  int label_idx = -1;
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = static_cast<int>(j);
  if (label_idx < 0)
    throw ConfigError(path + ": unknown label column '" + label_column + "'", 1);

  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw ConfigError(path + ": no feature columns", 1);

  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    std::vector<double> feat;
    feat.reserve(d);
    for (size_t j = 0; j < fields.size(); ++j) {
      const double v = parse_cell(fields[j], path, line_no);
      if (static_cast<int>(j) == label_idx)
        raw_labels.push_back(v);
      else
        feat.push_back(v);
    }
    rows.push_back(std::move(feat));
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");

  Dataset data;
  data.features.resize(static_cast<int>(rows.size()), d);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) data.features(static_cast<int>(i), j) = rows[i][j];

  bool integral = true;
  for (double v : raw_labels)
    if (!(std::floor(v) == v && std::abs(v) < 1e9)) integral = false;
  data.is_classification = integral;
  if (integral) {
    data.labels.resize(static_cast<int>(raw_labels.size()));
    for (size_t i = 0; i < raw_labels.size(); ++i)
      data.labels[static_cast<int>(i)] = static_cast<int>(raw_labels[i]);
  } else {
    data.targets = Eigen::Map<const Vec>(raw_labels.data(), raw_labels.size());
  }
  return data;
}

namespace {

// F and quantization wiring shared by the synthetic constructors: either
// F == 0 or the indicator of Q over all of x.
void attach_F(ProblemInstance& p, const LeastSquaresOptions& opts) {
  if (opts.quantized) {
    const QuantizedSpace space = QuantizedSpace::even(p.dim_x, opts.n_layers);
    p.quant = space;
    p.value_F = [space](const Vec& x) { return is_in_Q(x, space) ? 0.0 : kInf; };
    p.prox_F = [space](const Vec& v, double) { return project_Q(v, space).dense; };
  } else {
    p.value_F = [](const Vec&) { return 0.0; };
    p.prox_F = [](const Vec& v, double) { return v; };
  }
}

void attach_coupling(ProblemInstance& p, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("coupling weight must be >= 0");
  p.coupling = QuadraticCoupling{lambda};
  p.smoothness.L2_star = lambda;
  p.smoothness.L3_star = lambda;
  p.smoothness.L4_star = lambda;
  p.smoothness.L5_star = lambda;
  p.smoothness.l = 0.0;  // quadratic coupling is convex in x
  p.smoothness.H_inf = 0.0;
}

}  // namespace

ProblemInstance make_least_squares_from(const Mat& A, const Vec& b, double lambda,
                                        const LeastSquaresOptions& opts) {
  const int N = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  if (b.size() != N) throw std::invalid_argument("make_least_squares_from: |b| != rows(A)");
  auto A_p = std::make_shared<Mat>(A);
  auto b_p = std::make_shared<Vec>(b);

  ProblemInstance p;
  p.name = "least_squares";
  p.n_components = N;
  p.dim_y = d;
  p.dim_x = d;
  p.component_value = [A_p, b_p](int i, const Vec& y) {
    const double r = A_p->row(i).dot(y) - (*b_p)[i];
    return 0.5 * r * r;
  };
  p.component_gradient = [A_p, b_p](int i, const Vec& y) -> Vec {
    const double r = A_p->row(i).dot(y) - (*b_p)[i];
    return A_p->row(i).transpose() * r;
  };

  SmoothnessProfile& sp = p.smoothness;
  sp.L1_components.resize(N);
  for (int i = 0; i < N; ++i) sp.L1_components[i] = A.row(i).squaredNorm();
  const Mat gram = (A.transpose() * A) / N;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  sp.L1 = eig.eigenvalues().maxCoeff();
  sp.Gi_inf.assign(N, 0.0);
  // Exact minimum of G: mean squared residual of the least-squares solution.
  const Vec y_star = A.colPivHouseholderQr().solve(b);
  sp.G_inf = 0.5 * (A * y_star - b).squaredNorm() / N;
  sp.GH_inf = sp.G_inf;

  attach_coupling(p, lambda);
  attach_F(p, opts);
  return p;
}

ProblemInstance make_least_squares(int N, int d, double lambda, double noise,
                                   RngStream& rng, const LeastSquaresOptions& opts) {
  if (N < 1 || d < 1) throw std::invalid_argument("make_least_squares: need N, d >= 1");
  Mat A(N, d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  Vec y_true(d);
  for (int j = 0; j < d; ++j) y_true[j] = rng.normal();
  Vec b = A * y_true;
  for (int i = 0; i < N; ++i) b[i] += noise * rng.normal();
  return make_least_squares_from(A, b, lambda, opts);
}

ProblemInstance make_logistic_from(const Mat& A, const IVec& c, double lambda,
                                   const LeastSquaresOptions& opts) {
  const int N = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  if (c.size() != N) throw std::invalid_argument("make_logistic_from: |c| != rows(A)");
  for (int i = 0; i < N; ++i)
    if (c[i] != 1 && c[i] != -1)
      throw std::invalid_argument("make_logistic_from: labels must be +-1");
  auto A_p = std::make_shared<Mat>(A);
  auto c_p = std::make_shared<IVec>(c);

  ProblemInstance p;
  p.name = "logistic";
  p.n_components = N;
  p.dim_y = d;
  p.dim_x = d;
  // log(1 + exp(-t)) evaluated without overflow on both tails.
  auto softplus_neg = [](double t) {
    return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  };
  p.component_value = [A_p, c_p, softplus_neg](int i, const Vec& y) {
    return softplus_neg((*c_p)[i] * A_p->row(i).dot(y));
  };
  p.component_gradient = [A_p, c_p](int i, const Vec& y) -> Vec {
    const double t = (*c_p)[i] * A_p->row(i).dot(y);
    // sigma(-t); overflow of exp(t) saturates to 0, so both tails are safe.
    const double sig = 1.0 / (1.0 + std::exp(t));
    return A_p->row(i).transpose() * (-(*c_p)[i] * sig);
  };

  SmoothnessProfile& sp = p.smoothness;
  sp.L1_components.resize(N);
  for (int i = 0; i < N; ++i) sp.L1_components[i] = A.row(i).squaredNorm() / 4.0;
  const Mat gram = (A.transpose() * A) / (4.0 * N);
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  sp.L1 = eig.eigenvalues().maxCoeff();
  sp.Gi_inf.assign(N, 0.0);
  sp.G_inf = 0.0;
  sp.GH_inf = 0.0;

  attach_coupling(p, lambda);
  attach_F(p, opts);
  return p;
}

ProblemInstance make_logistic(int N, int d, double lambda, RngStream& rng,
                              const LeastSquaresOptions& opts) {
  if (N < 1 || d < 1) throw std::invalid_argument("make_logistic: need N, d >= 1");
  Mat A(N, d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  Vec w(d);
  for (int j = 0; j < d; ++j) w[j] = rng.normal();
  IVec c(N);
  for (int i = 0; i < N; ++i) c[i] = A.row(i).dot(w) >= 0.0 ? 1 : -1;
  return make_logistic_from(A, c, lambda, opts);
}

ProblemInstance make_scalar_toy(double target, double lambda) {
  ProblemInstance p;
  p.name = "scalar_toy";
  p.n_components = 1;
  p.dim_y = 1;
  p.dim_x = 1;
  p.component_value = [target](int, const Vec& y) {
    const double r = y[0] - target;
    return 0.5 * r * r;
  };
  p.component_gradient = [target](int, const Vec& y) -> Vec {
    Vec g(1);
    g[0] = y[0] - target;
    return g;
  };
  SmoothnessProfile& sp = p.smoothness;
  sp.L1 = 1.0;
  sp.L1_components = {1.0};
  sp.Gi_inf = {0.0};
  sp.G_inf = 0.0;
  sp.GH_inf = 0.0;
  attach_coupling(p, lambda);
  attach_F(p, LeastSquaresOptions{});
  return p;
}

}  // namespace stam
