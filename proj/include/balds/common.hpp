#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace balds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;

// Error categories, mapped to CLI exit codes (config=2, data=3, numeric=4).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline void ensure_finite(const Eigen::Ref<const Matrix>& m, const char* context) {
  if (!m.allFinite())
    throw NumericError(std::string("non-finite values in ") + context);
}

inline void ensure_finite(double v, const char* context) {
  if (!std::isfinite(v))
    throw NumericError(std::string("non-finite value in ") + context);
}

}  // namespace balds
