#include "bregsfp/operators.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace bregsfp;
using bregsfp::testing::fd_gradient;
using bregsfp::testing::relative_error;

namespace {

// Largest singular value of W2^{1/2} A W1^{-1/2}, i.e. the operator norm
// between the weighted spaces, from a full SVD.
double svd_norm(const MatrixXd& a, const Space& in, const Space& out) {
  const MatrixXd scaled = out.weights().cwiseSqrt().asDiagonal() * a * in.weights().cwiseSqrt().cwiseInverse().asDiagonal();
  return Eigen::JacobiSVD<MatrixXd>(scaled).singularValues()(0);
}

}  // namespace

TEST(DenseLinear, AdjointIdentityEuclideanAndWeighted) {
  SeededStream rng(51);
  const std::vector<std::pair<Space, Space>> pairs{{Space::euclidean(7), Space::euclidean(4)},
                                                   {Space::trapezoid(9), Space::trapezoid(6)},
                                                   {Space::weighted(rng.uniform_vector(5, 0.1, 3.0)),
                                                    Space::euclidean(8)}};
  for (const auto& [in, out] : pairs) {
    const auto op = Operator::dense_linear(rng.gaussian_matrix(out.dim(), in.dim()), in, out);
    for (int k = 0; k < 120; ++k) {
      const VectorXd x = rng.gaussian_vector(in.dim()), v = rng.gaussian_vector(out.dim());
      const double lhs = out.inner(op.apply(x), v), rhs = in.inner(x, op.adjoint(v));
      ASSERT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
      ASSERT_EQ(op.adjoint_at(x, v), op.adjoint(v));
    }
  }
}

TEST(DenseLinear, PowerIterationMatchesSvd) {
  SeededStream rng(52);
  for (int k = 0; k < 5; ++k) {
    const MatrixXd a = rng.gaussian_matrix(30, 40);
    const auto in = Space::trapezoid(40), out = Space::euclidean(30);
    const auto op = Operator::dense_linear(a, in, out);
    const double ref = svd_norm(a, in, out);
    EXPECT_LE(std::abs(op.lipschitz() - ref), 0.01 * ref);
    EXPECT_LE(op.lipschitz(), ref * (1 + 1e-12));
  }
  const MatrixXd d = VectorXd{{3.0, -5.0, 1.0}}.asDiagonal();
  EXPECT_NEAR(dense_linear(MatrixXd(d), Space::euclidean(3), Space::euclidean(3)).lipschitz(), 5.0, 0.05);
}

TEST(DenseLinear, DimensionAndFinitenessChecks) {
  EXPECT_THROW(Operator::dense_linear(MatrixXd::Ones(2, 3), Space::euclidean(2), Space::euclidean(2)),
               DimensionMismatch);
  MatrixXd bad = MatrixXd::Ones(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(Operator::dense_linear(bad), DomainError);
  const auto op = Operator::dense_linear(MatrixXd::Ones(2, 3));
  EXPECT_THROW(op.apply(VectorXd::Ones(2)), DimensionMismatch);
  EXPECT_THROW(op.adjoint(VectorXd::Ones(3)), DimensionMismatch);
  EXPECT_EQ(Operator::dense_linear(MatrixXd::Zero(2, 2)).lipschitz(), 0.0);
}

TEST(SineMultiplier, ValuesAndLipschitzBound) {
  const auto s = Space::trapezoid(5);
  const auto op = Operator::sine_multiplier(s);
  EXPECT_FALSE(op.is_linear());
  EXPECT_EQ(op.lipschitz(), 2.0);
  const VectorXd x = VectorXd::Constant(5, 1.0);
  const VectorXd t = *s.nodes();
  EXPECT_TRUE(op.apply(x).isApprox((std::sin(1.0) + t.array()).matrix()));
  EXPECT_THROW(op.matrix(), RequiresLinearOperator);
  EXPECT_THROW(op.adjoint(x), RequiresLinearOperator);
  EXPECT_THROW(Operator::sine_multiplier(Space::euclidean(5)), DimensionMismatch);

  SeededStream rng(53);
  const auto g = Space::trapezoid(33);
  const auto big = Operator::sine_multiplier(g);
  for (int k = 0; k < 200; ++k) {
    const VectorXd a = rng.gaussian_vector(33) * 3.0, b = rng.gaussian_vector(33) * 3.0;
    ASSERT_LE(g.norm((big.apply(a) - big.apply(b)).eval()), 2.0 * g.norm((a - b).eval()) + 1e-12);
  }
}

TEST(SineMultiplier, AdjointDerivativeMatchesFiniteDifferences) {
  SeededStream rng(54);
  const auto s = Space::trapezoid(17);
  const auto op = Operator::sine_multiplier(s);
  for (int k = 0; k < 20; ++k) {
    const VectorXd base = rng.gaussian_vector(17), v = rng.gaussian_vector(17);
    // Riesz gradient of x -> <A(x), v> is A'(x)* v.
    const VectorXd fd = fd_gradient([&](const VectorXd& p) { return s.inner(op.apply(p), v); }, s, base, 1e-5);
    ASSERT_LE(relative_error(fd, op.adjoint_at(base, v)), 1e-7);
    // Adjoint identity for the derivative along a direction h.
    const VectorXd h = rng.gaussian_vector(17);
    const VectorXd jac_h = ((base.array().cos() + s.nodes()->array()) * h.array()).matrix();
    ASSERT_NEAR(s.inner(jac_h, v), s.inner(h, op.adjoint_at(base, v)), 1e-12);
  }
}

TEST(LeastSquares, GradientAndConstants) {
  SeededStream rng(55);
  const auto in = Space::trapezoid(6), out = Space::euclidean(4);
  const auto op = Operator::dense_linear(rng.gaussian_matrix(4, 6), in, out);
  const VectorXd b = rng.gaussian_vector(4);
  const auto obj = least_squares_objective(op, b);
  EXPECT_DOUBLE_EQ(obj.gradient_lipschitz(), 2 * op.lipschitz() * op.lipschitz());
  for (int k = 0; k < 20; ++k) {
    const VectorXd x = rng.gaussian_vector(6);
    const VectorXd fd = fd_gradient([&](const VectorXd& p) { return obj.value(p); }, in, x, 1e-5);
    ASSERT_LE(relative_error(fd, obj.gradient(x)), 1e-7);
  }
  const MatrixXd eye = MatrixXd::Identity(3, 3);
  const auto simple = least_squares_objective(eye, VectorXd{{1.0, 2.0, 2.0}});
  EXPECT_DOUBLE_EQ(simple.value(VectorXd::Zero(3)), 9.0);
  EXPECT_EQ(simple.gradient(VectorXd::Zero(3)), (VectorXd{{-2.0, -4.0, -4.0}}));
  EXPECT_THROW(least_squares_objective(Operator::sine_multiplier(Space::trapezoid(4)), VectorXd(VectorXd::Zero(4))),
               RequiresLinearOperator);
  EXPECT_THROW(least_squares_objective(eye, VectorXd(VectorXd::Zero(2))), DimensionMismatch);
}
