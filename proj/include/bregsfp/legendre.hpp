#pragma once

#include "bregsfp/core.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace bregsfp {

enum class LegendreKind { HalfSquaredNorm, NegativeEntropy };

/// A strictly convex, differentiable Legendre function on an inner product
/// space, with closed-form gradient and conjugate gradient.
///
/// Gradients are Riesz representers with respect to the space's inner
/// product, so for a weighted space the gradient of sum_i w_i phi(x_i) is
/// phi'(x_i) coordinatewise.
template <typename Scalar>
class LegendreFunction {
 public:
  using VectorType = Vector<Scalar>;
  using SpaceType = InnerProductSpace<Scalar>;

  static LegendreFunction half_squared_norm(SpaceType space) {
    return LegendreFunction(LegendreKind::HalfSquaredNorm, std::move(space), Scalar(1), Scalar(0));
  }

  /// sum_i w_i (x_i log x_i - x_i). Strong convexity holds only on a bounded
  /// box 0 < x_i <= box_bound, where delta = 1 / box_bound.
  static LegendreFunction negative_entropy(SpaceType space, Scalar box_bound = Scalar(10)) {
    if (!(box_bound > Scalar(0)) || !std::isfinite(static_cast<double>(box_bound))) {
      throw ConfigError("negative entropy box bound must be positive and finite");
    }
    return LegendreFunction(LegendreKind::NegativeEntropy, std::move(space),
                            Scalar(1) / box_bound, box_bound);
  }

  LegendreKind kind() const { return kind_; }
  const SpaceType& space() const { return space_; }
  Eigen::Index dim() const { return space_.dim(); }

  /// Strong-convexity modulus with respect to the space norm.
  Scalar delta() const { return delta_; }

  /// Upper end of the box on which delta is valid (entropy only).
  Scalar box_bound() const { return box_bound_; }

  /// Lipschitz constant of the gradient, when one exists globally.
  std::optional<Scalar> gradient_lipschitz() const {
    if (kind_ == LegendreKind::HalfSquaredNorm) return Scalar(1);
    return std::nullopt;
  }

  /// Membership in dom(grad).
  template <typename A>
  bool in_domain(const Eigen::MatrixBase<A>& x) const {
    if (x.size() != dim() || !all_finite(x)) return false;
    if (kind_ == LegendreKind::NegativeEntropy) return (x.array() > Scalar(0)).all();
    return true;
  }

  /// Membership in dom(f), which for entropy includes the boundary x_i = 0.
  template <typename A>
  bool in_value_domain(const Eigen::MatrixBase<A>& x) const {
    if (x.size() != dim() || !all_finite(x)) return false;
    if (kind_ == LegendreKind::NegativeEntropy) return (x.array() >= Scalar(0)).all();
    return true;
  }

  template <typename A>
  Scalar value(const Eigen::MatrixBase<A>& x) const {
    if (!in_value_domain(x)) throw DomainError(domain_message("value"));
    switch (kind_) {
      case LegendreKind::HalfSquaredNorm:
        return space_.squared_norm(x) / 2;
      case LegendreKind::NegativeEntropy: {
        Scalar sum(0);
        const auto& w = space_.weights();
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const Scalar xi = x(i);
          // 0 log 0 = 0
          const Scalar term = xi > Scalar(0) ? xi * std::log(xi) - xi : Scalar(0);
          sum += w(i) * term;
        }
        return sum;
      }
    }
    return Scalar(0);
  }

  template <typename A>
  VectorType gradient(const Eigen::MatrixBase<A>& x) const {
    if (!in_domain(x)) throw DomainError(domain_message("gradient"));
    if (kind_ == LegendreKind::HalfSquaredNorm) return x;
    return x.array().log().matrix();
  }

  /// Gradient of the Fenchel conjugate; the inverse map of gradient().
  template <typename A>
  VectorType conjugate_gradient(const Eigen::MatrixBase<A>& g) const {
    require_dim(g.size(), dim(), "conjugate_gradient");
    if (!all_finite(g)) throw DomainError("conjugate_gradient: non-finite dual point");
    if (kind_ == LegendreKind::HalfSquaredNorm) return g;
    VectorType x = g.array().exp().matrix();
    // exp underflow leaves the open orthant
    if (!in_domain(x)) throw DomainError("conjugate_gradient: result left dom(grad)");
    return x;
  }

  const char* name() const {
    return kind_ == LegendreKind::HalfSquaredNorm ? "half_squared_norm" : "negative_entropy";
  }

 private:
  LegendreFunction(LegendreKind kind, SpaceType space, Scalar delta, Scalar box)
      : kind_(kind), space_(std::move(space)), delta_(delta), box_bound_(box) {}

  std::string domain_message(const char* op) const {
    return std::string(name()) + "::" + op + ": point outside domain";
  }

  LegendreKind kind_;
  SpaceType space_;
  Scalar delta_;
  Scalar box_bound_;
};

using Legendre = LegendreFunction<double>;

template <typename Scalar>
LegendreFunction<Scalar> half_squared_norm(InnerProductSpace<Scalar> space) {
  return LegendreFunction<Scalar>::half_squared_norm(std::move(space));
}

template <typename Scalar>
LegendreFunction<Scalar> negative_entropy(InnerProductSpace<Scalar> space,
                                          Scalar box_bound = Scalar(10)) {
  return LegendreFunction<Scalar>::negative_entropy(std::move(space), box_bound);
}

/// D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>.
///
/// The half-squared-norm case is evaluated as (1/2)||x - y||^2, which is the
/// same quantity without the cancellation of the generic formula.
template <typename Scalar, typename A, typename B>
Scalar bregman_distance(const LegendreFunction<Scalar>& f, const Eigen::MatrixBase<A>& x,
                        const Eigen::MatrixBase<B>& y) {
  if (!f.in_domain(y)) throw DomainError("bregman_distance: y outside dom(grad f)");
  if (!f.in_value_domain(x)) throw DomainError("bregman_distance: x outside dom(f)");
  const auto& space = f.space();
  if (f.kind() == LegendreKind::HalfSquaredNorm) {
    return space.squared_norm((x - y).eval()) / 2;
  }
  // Entropy: sum_i w_i (x_i log(x_i / y_i) - x_i + y_i), each term >= 0.
  const auto& w = space.weights();
  Scalar sum(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar xi = x(i);
    const Scalar yi = y(i);
    const Scalar t = xi > Scalar(0) ? xi * std::log(xi / yi) - xi + yi : yi;
    sum += w(i) * t;
  }
  return sum;
}

/// Residual of the three-point identity
///   D(x, y) = D(x, z) - D(y, z) + <grad f(z) - grad f(y), x - y>.
/// Zero in exact arithmetic.
template <typename Scalar, typename A, typename B, typename C>
Scalar three_point_gap(const LegendreFunction<Scalar>& f, const Eigen::MatrixBase<A>& x,
                       const Eigen::MatrixBase<B>& y, const Eigen::MatrixBase<C>& z) {
  const Vector<Scalar> gy = f.gradient(y);
  const Vector<Scalar> gz = f.gradient(z);
  const Scalar rhs = bregman_distance(f, x, z) - bregman_distance(f, y, z) +
                     f.space().inner((gz - gy).eval(), (x - y).eval());
  return bregman_distance(f, x, y) - rhs;
}

}  // namespace bregsfp
