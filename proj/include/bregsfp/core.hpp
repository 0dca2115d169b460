#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace bregsfp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

// ---------------------------------------------------------------------------
// Errors. Everything the library throws derives from bregsfp::Error so
// callers can catch one type at the boundary.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies outside the domain of a Legendre function's gradient.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// No closed-form Bregman projection exists for this (set, function) pair.
class UnsupportedCombination : public Error {
 public:
  using Error::Error;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

class RequiresLinearOperator : public Error {
 public:
  using Error::Error;
};

class MissingObjective : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ConfigError(what);
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(want) + ", got " +
                            std::to_string(got));
  }
}

/// Finite-dimensional real Hilbert space with a diagonal inner product
/// <x, y> = sum_i w_i x_i y_i. Uniform unit weights give R^n; trapezoid
/// weights on a uniform grid over [0, 1] give a discretized L^2([0, 1]).
template <typename Scalar>
class InnerProductSpace {
 public:
  using VectorType = Vector<Scalar>;

  static InnerProductSpace euclidean(Eigen::Index dim) {
    if (dim <= 0) throw DimensionMismatch("space dimension must be positive");
    return InnerProductSpace(VectorType::Ones(dim), std::nullopt, true);
  }

  /// Composite trapezoid rule on m equispaced nodes t_i = i / (m - 1).
  static InnerProductSpace trapezoid(Eigen::Index m) {
    if (m < 2) throw DimensionMismatch("trapezoid grid needs at least 2 points");
    const Scalar h = Scalar(1) / Scalar(m - 1);
    VectorType w = VectorType::Constant(m, h);
    w(0) = h / 2;
    w(m - 1) = h / 2;
    VectorType nodes = VectorType::LinSpaced(m, Scalar(0), Scalar(1));
    return InnerProductSpace(std::move(w), std::move(nodes), false);
  }

  static InnerProductSpace weighted(VectorType weights) {
    if (weights.size() == 0) throw DimensionMismatch("space dimension must be positive");
    if (!all_finite(weights) || (weights.array() <= Scalar(0)).any()) {
      throw ConfigError("inner product weights must be finite and positive");
    }
    const bool unit = (weights.array() == Scalar(1)).all();
    return InnerProductSpace(std::move(weights), std::nullopt, unit);
  }

  Eigen::Index dim() const { return weights_.size(); }
  const VectorType& weights() const { return weights_; }
  bool has_unit_weights() const { return unit_; }

  /// Grid nodes, present only for spaces built from a quadrature rule.
  const std::optional<VectorType>& nodes() const { return nodes_; }

  template <typename A, typename B>
  Scalar inner(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    if (unit_) return x.dot(y);
    return (weights_.array() * x.array() * y.array()).sum();
  }

  template <typename A>
  Scalar squared_norm(const Eigen::MatrixBase<A>& x) const {
    if (unit_) return x.squaredNorm();
    return (weights_.array() * x.array().square()).sum();
  }

  template <typename A>
  Scalar norm(const Eigen::MatrixBase<A>& x) const {
    using std::sqrt;
    return sqrt(squared_norm(x));
  }

  template <typename A>
  void check_point(const Eigen::MatrixBase<A>& x, const char* what = "point") const {
    require_dim(x.size(), dim(), what);
    if (!all_finite(x)) throw DomainError(std::string(what) + " has non-finite coordinates");
  }

  bool operator==(const InnerProductSpace& other) const {
    return dim() == other.dim() && weights_ == other.weights_;
  }

 private:
  InnerProductSpace(VectorType w, std::optional<VectorType> nodes, bool unit)
      : weights_(std::move(w)), nodes_(std::move(nodes)), unit_(unit) {}

  VectorType weights_;
  std::optional<VectorType> nodes_;
  bool unit_;
};

using Space = InnerProductSpace<double>;

}  // namespace bregsfp
