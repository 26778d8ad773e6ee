#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace specfield {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Bad or inconsistent user input (configs, parameter values, layouts).
/// Maps to process exit code 2.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 2;
};

/// Numerical breakdown: singular systems, divergent oracles, non-finite
/// intermediates. Maps to process exit code 3.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 3;
};

/// On-disk format problems: unknown manifest versions, results that do not
/// belong to the dataset they are reported against. Maps to exit code 4.
class format_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 4;
};

} // namespace specfield
