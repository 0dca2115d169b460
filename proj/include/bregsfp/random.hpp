#pragma once

#include "bregsfp/core.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace bregsfp {

/// Seeded stream with a portable output contract.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so the conversions are
/// written out here:
///   uniform01()  = (u >> 11) * 2^-53                    in [0, 1)
///   uniform(a,b) = a + (b - a) * uniform01()
///   gaussian()   = Box-Muller on (u1, u2), u1 = 1 - uniform01() in (0, 1];
///                  returns sqrt(-2 ln u1) cos(2 pi u2), then caches the
///                  matching sine branch for the next call.
/// Matrices are filled row by row.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VectorXd gaussian_vector(Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian();
    return v;
  }

  VectorXd uniform_vector(Eigen::Index n, double a, double b) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(a, b);
    return v;
  }

  MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bregsfp
