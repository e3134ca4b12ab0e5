#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace stam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// An iterate, gradient, or objective stopped being finite. Carries the
// iteration (and component index, when the failure is inside one summand)
// so the harness can report where a run blew up.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, long iteration = -1,
                        int component = -1)
      : std::runtime_error(what), iteration(iteration), component(component) {}

  long iteration;
  int component;
};

// Invalid configuration or input data. line/column are 1-based when known,
// 0 otherwise.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line(line), column(column) {}

  int line;
  int column;
};

}  // namespace stam
