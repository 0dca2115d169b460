#pragma once

#include "bregsfp/core.hpp"
#include "bregsfp/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

namespace bregsfp {

template <typename Scalar>
struct Ball {
  Scalar radius;
  Vector<Scalar> center;
};

/// {x : <normal, x> = offset}, inner product taken in the set's space.
template <typename Scalar>
struct Hyperplane {
  Vector<Scalar> normal;
  Scalar offset;
};

template <typename Scalar>
struct Box {
  Vector<Scalar> lower;
  Vector<Scalar> upper;
};

/// {x : <x, 1> = 0}; with quadrature weights this is a zero integral.
struct ZeroMean {};

struct WholeSpace {};

/// Closed convex set in an inner product space.
template <typename Scalar>
class ConvexSet {
 public:
  using VectorType = Vector<Scalar>;
  using SpaceType = InnerProductSpace<Scalar>;
  using Shape = std::variant<Ball<Scalar>, Hyperplane<Scalar>, Box<Scalar>, ZeroMean, WholeSpace>;

  static ConvexSet ball(SpaceType space, Scalar radius) {
    VectorType c = VectorType::Zero(space.dim());
    return ball(std::move(space), radius, std::move(c));
  }

  static ConvexSet ball(SpaceType space, Scalar radius, VectorType center) {
    if (!(radius > Scalar(0))) throw ConfigError("ball radius must be positive");
    space.check_point(center, "ball center");
    return ConvexSet(std::move(space), Ball<Scalar>{radius, std::move(center)});
  }

  static ConvexSet hyperplane(SpaceType space, VectorType normal, Scalar offset) {
    space.check_point(normal, "hyperplane normal");
    if (!(space.squared_norm(normal) > Scalar(0))) throw ConfigError("hyperplane normal must be nonzero");
    return ConvexSet(std::move(space), Hyperplane<Scalar>{std::move(normal), offset});
  }

  static ConvexSet box(SpaceType space, VectorType lower, VectorType upper) {
    require_dim(lower.size(), space.dim(), "box lower");
    require_dim(upper.size(), space.dim(), "box upper");
    if ((lower.array() > upper.array()).any() || lower.array().isNaN().any() ||
        upper.array().isNaN().any()) {
      throw ConfigError("box requires lower <= upper coordinatewise");
    }
    return ConvexSet(std::move(space), Box<Scalar>{std::move(lower), std::move(upper)});
  }

  static ConvexSet box(SpaceType space, Scalar lower, Scalar upper) {
    const auto n = space.dim();
    return box(std::move(space), VectorType::Constant(n, lower), VectorType::Constant(n, upper));
  }

  static ConvexSet zero_mean(SpaceType space) { return ConvexSet(std::move(space), ZeroMean{}); }

  static ConvexSet whole_space(SpaceType space) { return ConvexSet(std::move(space), WholeSpace{}); }

  const SpaceType& space() const { return space_; }
  const Shape& shape() const { return shape_; }
  Eigen::Index dim() const { return space_.dim(); }

  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(shape_); }
  bool is_affine() const {
    return std::holds_alternative<Hyperplane<Scalar>>(shape_) ||
           std::holds_alternative<ZeroMean>(shape_) || is_whole_space();
  }

  /// Membership with an absolute tolerance on the defining constraint.
  template <typename A>
  bool contains(const Eigen::MatrixBase<A>& x, Scalar tol = Scalar(1e-12)) const {
    if (x.size() != dim()) return false;
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Ball<Scalar>>) {
            return space_.norm((x - s.center).eval()) <= s.radius + tol;
          } else if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
            using std::abs;
            return abs(space_.inner(s.normal, x) - s.offset) <= tol;
          } else if constexpr (std::is_same_v<S, Box<Scalar>>) {
            return ((x.array() >= s.lower.array() - tol) && (x.array() <= s.upper.array() + tol)).all();
          } else if constexpr (std::is_same_v<S, ZeroMean>) {
            using std::abs;
            return abs(space_.inner(VectorType::Ones(dim()), x)) <= tol;
          } else {
            return true;
          }
        },
        shape_);
  }

  const char* name() const {
    return std::visit(
        [](const auto& s) -> const char* {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Ball<Scalar>>) return "ball";
          else if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) return "hyperplane";
          else if constexpr (std::is_same_v<S, Box<Scalar>>) return "box";
          else if constexpr (std::is_same_v<S, ZeroMean>) return "zero_mean";
          else return "whole_space";
        },
        shape_);
  }

 private:
  ConvexSet(SpaceType space, Shape shape) : space_(std::move(space)), shape_(std::move(shape)) {}

  SpaceType space_;
  Shape shape_;
};

using Set = ConvexSet<double>;

namespace detail {

template <typename Scalar, typename A>
Vector<Scalar> project_onto_hyperplane(const InnerProductSpace<Scalar>& space,
                                       const Vector<Scalar>& normal, Scalar offset,
                                       const Eigen::MatrixBase<A>& x) {
  const Scalar excess = space.inner(normal, x) - offset;
  return x - (excess / space.squared_norm(normal)) * normal;
}

}  // namespace detail

/// Nearest point of the set in the space norm.
template <typename Scalar, typename A>
Vector<Scalar> metric_project(const ConvexSet<Scalar>& set, const Eigen::MatrixBase<A>& x) {
  const auto& space = set.space();
  space.check_point(x, "metric_project");
  return std::visit(
      [&](const auto& s) -> Vector<Scalar> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball<Scalar>>) {
          const Vector<Scalar> d = x - s.center;
          const Scalar r = space.norm(d);
          if (r <= s.radius) return x;
          return s.center + (s.radius / r) * d;
        } else if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
          return detail::project_onto_hyperplane(space, s.normal, s.offset, x);
        } else if constexpr (std::is_same_v<S, Box<Scalar>>) {
          return x.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<S, ZeroMean>) {
          const Vector<Scalar> ones = Vector<Scalar>::Ones(space.dim());
          return detail::project_onto_hyperplane(space, ones, Scalar(0), x);
        } else {
          return x;
        }
      },
      set.shape());
}

/// argmin over the set of D_f(., x).
///
/// Closed forms only: every set under the half squared norm (where this is
/// the metric projection), and under negative entropy the whole space, boxes
/// (coordinatewise clamp, since D_f is separable with its minimum at x) and
/// hyperplanes with a constant normal (multiplicative rescaling). Anything
/// else throws UnsupportedCombination.
template <typename Scalar, typename A>
Vector<Scalar> bregman_project(const ConvexSet<Scalar>& set, const LegendreFunction<Scalar>& f,
                               const Eigen::MatrixBase<A>& x) {
  require_dim(f.dim(), set.dim(), "bregman_project: function/set");
  if (!f.in_domain(x)) throw DomainError("bregman_project: point outside dom(grad f)");
  if (f.kind() == LegendreKind::HalfSquaredNorm) return metric_project(set, x);

  const auto& space = set.space();
  const auto unsupported = [&]() {
    return UnsupportedCombination(std::string("no closed-form ") + f.name() +
                                  " projection onto " + set.name());
  };
  return std::visit(
      [&](const auto& s) -> Vector<Scalar> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, WholeSpace>) {
          return x;
        } else if constexpr (std::is_same_v<S, Box<Scalar>>) {
          if ((s.upper.array() <= Scalar(0)).any()) {
            throw DomainError("bregman_project: box misses the positive orthant");
          }
          // Lower bounds at or below zero never bind for a positive x.
          return x.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
          const Scalar a = s.normal(0);
          if (!(s.normal.array() == a).all()) throw unsupported();
          // <a 1, y> = c with y = lambda x gives lambda = c / (a <1, x>).
          const Scalar mass = space.inner(Vector<Scalar>::Ones(space.dim()), x);
          const Scalar lambda = s.offset / (a * mass);
          if (!(lambda > Scalar(0))) {
            throw DomainError("bregman_project: hyperplane misses the positive orthant");
          }
          return lambda * x;
        } else {
          throw unsupported();
        }
      },
      set.shape());
}

/// D_f(y, x) - D_f(y, p) - D_f(p, x) for p the Bregman projection of x.
/// Nonnegative for every y in the set.
template <typename Scalar, typename A, typename B>
Scalar pythagoras_gap(const ConvexSet<Scalar>& set, const LegendreFunction<Scalar>& f,
                      const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& x) {
  const Vector<Scalar> p = bregman_project(set, f, x);
  return bregman_distance(f, y, x) - bregman_distance(f, y, p) - bregman_distance(f, p, x);
}

// ---------------------------------------------------------------------------
// Proximable regularizers
// ---------------------------------------------------------------------------

enum class ProximableKind { Zero, L1 };

/// Nonsmooth convex regularizer with a closed-form proximal map. The L1
/// norm is weighted by the space: mu * sum_i w_i |x_i|.
template <typename Scalar>
class ProximableFunction {
 public:
  static ProximableFunction zero() { return ProximableFunction(ProximableKind::Zero, Scalar(0)); }

  static ProximableFunction l1(Scalar mu) {
    if (!(mu >= Scalar(0))) throw ConfigError("l1 weight must be nonnegative");
    return ProximableFunction(ProximableKind::L1, mu);
  }

  ProximableKind kind() const { return kind_; }
  Scalar weight() const { return mu_; }

  template <typename A>
  Scalar value(const InnerProductSpace<Scalar>& space, const Eigen::MatrixBase<A>& x) const {
    if (kind_ == ProximableKind::Zero) return Scalar(0);
    if (space.has_unit_weights()) return mu_ * x.template lpNorm<1>();
    return mu_ * (space.weights().array() * x.array().abs()).sum();
  }

 private:
  ProximableFunction(ProximableKind kind, Scalar mu) : kind_(kind), mu_(mu) {}

  ProximableKind kind_;
  Scalar mu_;
};

using Proximable = ProximableFunction<double>;

/// argmin_y g(y) + ||y - x||^2 / (2 eta). Soft-thresholding at eta * mu for
/// L1; the quadrature weights cancel coordinatewise.
template <typename Scalar, typename A>
Vector<Scalar> prox(const ProximableFunction<Scalar>& g, Scalar eta, const Eigen::MatrixBase<A>& x) {
  if (!(eta > Scalar(0))) throw ConfigError("prox step must be positive");
  if (g.kind() == ProximableKind::Zero || g.weight() == Scalar(0)) return x;
  const Scalar t = eta * g.weight();
  return (x.array().sign() * (x.array().abs() - t).max(Scalar(0))).matrix();
}

}  // namespace bregsfp
