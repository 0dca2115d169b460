#pragma once

#include "bregsfp/core.hpp"
#include "bregsfp/random.hpp"

#include <cmath>
#include <cstdint>
#include <variant>

namespace bregsfp {

template <typename Scalar>
struct DenseLinear {
  Matrix<Scalar> matrix;
};

/// Pointwise A(x)(t) = sin(x(t)) + t x(t) on a grid.
template <typename Scalar>
struct SineMultiplier {
  Vector<Scalar> nodes;
};

struct PowerIterationOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-8;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Forward map A: H1 -> H2 with the adjoint of its derivative.
///
/// For linear maps adjoint_at ignores its base point. Adjoints are taken
/// with respect to the weighted inner products of the two spaces, so
/// <A x, v>_2 = <x, A* v>_1, i.e. A* = W1^{-1} A^T W2.
template <typename Scalar>
class ForwardOperator {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;
  using SpaceType = InnerProductSpace<Scalar>;
  using Kind = std::variant<DenseLinear<Scalar>, SineMultiplier<Scalar>>;

  static ForwardOperator dense_linear(MatrixType matrix, SpaceType in, SpaceType out,
                                      const PowerIterationOptions& opts = {}) {
    require_dim(matrix.cols(), in.dim(), "dense_linear columns");
    require_dim(matrix.rows(), out.dim(), "dense_linear rows");
    if (!all_finite(matrix)) throw DomainError("dense_linear: matrix has non-finite entries");
    ForwardOperator op(DenseLinear<Scalar>{std::move(matrix)}, std::move(in), std::move(out), Scalar(0));
    op.lipschitz_ = op.estimate_norm(opts);
    return op;
  }

  static ForwardOperator dense_linear(MatrixType matrix, const PowerIterationOptions& opts = {}) {
    auto in = SpaceType::euclidean(matrix.cols());
    auto out = SpaceType::euclidean(matrix.rows());
    return dense_linear(std::move(matrix), std::move(in), std::move(out), opts);
  }

  /// Requires a grid space (one built by InnerProductSpace::trapezoid).
  /// |cos(u) + t| <= 2 on [0, 1], hence L = 2.
  static ForwardOperator sine_multiplier(SpaceType space) {
    if (!space.nodes()) throw DimensionMismatch("sine_multiplier needs a space with grid nodes");
    VectorType nodes = *space.nodes();
    SpaceType out = space;
    return ForwardOperator(SineMultiplier<Scalar>{std::move(nodes)}, std::move(space), std::move(out),
                           Scalar(2));
  }

  const SpaceType& in_space() const { return in_; }
  const SpaceType& out_space() const { return out_; }
  Scalar lipschitz() const { return lipschitz_; }
  bool is_linear() const { return std::holds_alternative<DenseLinear<Scalar>>(kind_); }
  const Kind& kind() const { return kind_; }

  /// Matrix of a linear operator; throws for nonlinear ones.
  const MatrixType& matrix() const {
    if (!is_linear()) throw RequiresLinearOperator("operator is nonlinear");
    return std::get<DenseLinear<Scalar>>(kind_).matrix;
  }

  template <typename A>
  VectorType apply(const Eigen::MatrixBase<A>& x) const {
    require_dim(x.size(), in_.dim(), "apply");
    if (const auto* lin = std::get_if<DenseLinear<Scalar>>(&kind_)) return lin->matrix * x;
    const auto& t = std::get<SineMultiplier<Scalar>>(kind_).nodes;
    return (x.array().sin() + t.array() * x.array()).matrix();
  }

  /// Adjoint of the derivative of A at base, applied to direction.
  template <typename A, typename B>
  VectorType adjoint_at(const Eigen::MatrixBase<A>& base, const Eigen::MatrixBase<B>& direction) const {
    require_dim(base.size(), in_.dim(), "adjoint_at base");
    require_dim(direction.size(), out_.dim(), "adjoint_at direction");
    if (const auto* lin = std::get_if<DenseLinear<Scalar>>(&kind_)) return linear_adjoint(lin->matrix, direction);
    const auto& t = std::get<SineMultiplier<Scalar>>(kind_).nodes;
    // Diagonal Jacobian on a shared grid: self-adjoint, weights cancel.
    return ((base.array().cos() + t.array()) * direction.array()).matrix();
  }

  /// Adjoint of a linear operator.
  template <typename B>
  VectorType adjoint(const Eigen::MatrixBase<B>& direction) const {
    require_dim(direction.size(), out_.dim(), "adjoint direction");
    return linear_adjoint(matrix(), direction);
  }

 private:
  ForwardOperator(Kind kind, SpaceType in, SpaceType out, Scalar lipschitz)
      : kind_(std::move(kind)), in_(std::move(in)), out_(std::move(out)), lipschitz_(lipschitz) {}

  template <typename B>
  VectorType linear_adjoint(const MatrixType& m, const Eigen::MatrixBase<B>& v) const {
    if (in_.has_unit_weights() && out_.has_unit_weights()) return m.transpose() * v;
    VectorType weighted = out_.weights().cwiseProduct(v);
    VectorType back = m.transpose() * weighted;
    return back.cwiseQuotient(in_.weights());
  }

  /// Power iteration on A*A in the weighted geometry; returns sqrt of the
  /// Rayleigh quotient, which approaches the operator norm from below.
  Scalar estimate_norm(const PowerIterationOptions& opts) const {
    const auto& m = matrix();
    SeededStream rng(opts.seed);
    VectorType x = rng.gaussian_vector(in_.dim()).template cast<Scalar>();
    Scalar nx = in_.norm(x);
    if (nx == Scalar(0)) return Scalar(0);
    x /= nx;
    Scalar lambda(0);
    for (int k = 0; k < opts.max_iterations; ++k) {
      const VectorType y = linear_adjoint(m, (m * x).eval());
      const Scalar next = in_.inner(x, y);
      const Scalar ny = in_.norm(y);
      if (ny == Scalar(0)) return Scalar(0);
      x = y / ny;
      using std::abs;
      const bool done = k > 0 && abs(next - lambda) <= Scalar(opts.relative_tolerance) * abs(next);
      lambda = next;
      if (done) break;
    }
    using std::sqrt;
    return sqrt(lambda);
  }

  Kind kind_;
  SpaceType in_;
  SpaceType out_;
  Scalar lipschitz_;
};

using Operator = ForwardOperator<double>;

template <typename Scalar>
ForwardOperator<Scalar> dense_linear(Matrix<Scalar> matrix, InnerProductSpace<Scalar> in,
                                     InnerProductSpace<Scalar> out) {
  return ForwardOperator<Scalar>::dense_linear(std::move(matrix), std::move(in), std::move(out));
}

template <typename Scalar>
ForwardOperator<Scalar> sine_multiplier(InnerProductSpace<Scalar> space) {
  return ForwardOperator<Scalar>::sine_multiplier(std::move(space));
}

/// Smooth data term ||A x - b||^2 for a linear A, with gradient
/// 2 A*(A x - b) and gradient Lipschitz constant 2 ||A||^2.
template <typename Scalar>
class LeastSquaresObjective {
 public:
  using VectorType = Vector<Scalar>;

  LeastSquaresObjective(ForwardOperator<Scalar> op, VectorType b) : op_(std::move(op)), b_(std::move(b)) {
    if (!op_.is_linear()) throw RequiresLinearOperator("least squares objective needs a linear operator");
    op_.out_space().check_point(b_, "least squares target");
  }

  template <typename A>
  Scalar value(const Eigen::MatrixBase<A>& x) const {
    return op_.out_space().squared_norm((op_.apply(x) - b_).eval());
  }

  template <typename A>
  VectorType gradient(const Eigen::MatrixBase<A>& x) const {
    return Scalar(2) * op_.adjoint((op_.apply(x) - b_).eval());
  }

  Scalar gradient_lipschitz() const { return Scalar(2) * op_.lipschitz() * op_.lipschitz(); }

  const ForwardOperator<Scalar>& op() const { return op_; }
  const VectorType& target() const { return b_; }

 private:
  ForwardOperator<Scalar> op_;
  VectorType b_;
};

template <typename Scalar>
LeastSquaresObjective<Scalar> least_squares_objective(ForwardOperator<Scalar> op, Vector<Scalar> b) {
  return LeastSquaresObjective<Scalar>(std::move(op), std::move(b));
}

template <typename Scalar>
LeastSquaresObjective<Scalar> least_squares_objective(Matrix<Scalar> matrix, Vector<Scalar> b) {
  return LeastSquaresObjective<Scalar>(ForwardOperator<Scalar>::dense_linear(std::move(matrix)), std::move(b));
}

}  // namespace bregsfp
