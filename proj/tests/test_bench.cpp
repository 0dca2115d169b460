#include "bregsfp/bench.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cstdlib>

using namespace bregsfp;
using namespace bregsfp::bench;

TEST(Example1, GeneratorIsPureAndZeroIsFeasible) {
  const auto a = make_example1(12, 42), b = make_example1(12, 42), c = make_example1(12, 43);
  EXPECT_EQ(a.problem.op.matrix(), b.problem.op.matrix());
  EXPECT_EQ(a.zeta0, b.zeta0);
  EXPECT_NE(a.problem.op.matrix(), c.problem.op.matrix());
  EXPECT_LE(a.zeta0.cwiseAbs().maxCoeff(), 1.0);
  const auto gap = feasibility_gap(a.problem, VectorXd(VectorXd::Zero(12)));
  EXPECT_EQ(gap.dist_c, 0.0);
  EXPECT_EQ(gap.gap_q, 0.0);
  EXPECT_THROW(make_example1(1, 0), DimensionMismatch);
  EXPECT_EQ(make_example1(1000, 1).problem.op.matrix().rows(), 1000);
}

TEST(Example2, ZeroIsFeasibleAndStartIsNot) {
  const auto ex = make_example2(64);
  const auto zero = feasibility_gap(ex.problem, VectorXd(VectorXd::Zero(64)));
  EXPECT_EQ(zero.dist_c, 0.0);
  EXPECT_EQ(zero.gap_q, 0.0);
  const auto start = feasibility_gap(ex.problem, ex.zeta0);
  EXPECT_GT(start.dist_c, 0.1);
  EXPECT_GT(start.gap_q, 0.1);
  EXPECT_FALSE(ex.problem.op.is_linear());
  EXPECT_THROW(make_example2(15), DimensionMismatch);
}

TEST(Example3, StructureAndBoxFeasibility) {
  const auto ex = make_example3(20, 30, 0.1, 5);
  EXPECT_TRUE(ex.problem.set_q.is_whole_space());
  EXPECT_TRUE(ex.problem.objective.has_value());
  EXPECT_DOUBLE_EQ(composite_step(ex.problem), 1.0 / (2 * std::pow(ex.problem.op.lipschitz(), 2)));
  Config cfg;
  cfg.max_iter = 200000;
  const auto r = solve_proximal_gradient(ex.problem, cfg, ex.zeta0);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_LE(r.final.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
  EXPECT_THROW(make_example3(1, 5, 0.1, 0), DimensionMismatch);
  EXPECT_THROW(make_example3(5, 5, -0.1, 0), ConfigError);
}

TEST(Example3, UnregularizedUnconstrainedMatchesNormalEquations) {
  // Tall, well-posed system so the least-squares minimizer is unique.
  auto ex = make_example3(12, 4, 0.0, 17);
  ex.problem.set_c = Set::whole_space(ex.problem.op.in_space());
  const MatrixXd& a = ex.problem.op.matrix();
  SeededStream rng(17);
  (void)rng.gaussian_matrix(12, 4);
  const VectorXd b = rng.gaussian_vector(12);
  const VectorXd exact = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  const double f_star = (a * exact - b).squaredNorm();

  Config cfg;
  cfg.tol = 1e-10;
  cfg.max_iter = 400000;
  cfg.eta = composite_step(ex.problem);
  const auto pg = solve_proximal_gradient(ex.problem, cfg, ex.zeta0);
  const auto h = solve_algorithm2(ex.problem, cfg, ex.zeta0);
  ASSERT_EQ(pg.status, Status::Converged);
  ASSERT_EQ(h.status, Status::Converged);
  const double v_pg = ex.problem.composite_value(pg.final), v_h = ex.problem.composite_value(h.final);
  EXPECT_LE(std::abs(v_pg - f_star) / f_star, 1e-6);
  EXPECT_LE(std::abs(v_h - v_pg) / v_pg, 1e-6);
}

TEST(ExperimentSpec, ValidationErrors) {
  ExperimentSpec spec;
  EXPECT_THROW(validate(spec), ConfigError);
  spec.algorithms = {AlgorithmId::ProxGrad};
  EXPECT_THROW(validate(spec), MissingObjective);
  spec.example = ExampleId::Example2;
  spec.algorithms = {AlgorithmId::Alg1, AlgorithmId::CQ};
  EXPECT_THROW(validate(spec), RequiresLinearOperator);
  spec.example = ExampleId::Example1;
  spec.n = 0;
  spec.algorithms = {AlgorithmId::CQ};
  EXPECT_THROW(validate(spec), DimensionMismatch);
  spec.n = 10;
  spec.repetitions = 0;
  EXPECT_THROW(validate(spec), ConfigError);
  spec.repetitions = 1;
  spec.example = ExampleId::Custom;
  EXPECT_THROW(validate(spec), ConfigError);
}

TEST(Algorithms, NamesRoundTrip) {
  for (auto a : {AlgorithmId::Alg1, AlgorithmId::Alg2, AlgorithmId::CQ, AlgorithmId::InertialCQ,
                 AlgorithmId::ProxGrad})
    EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
  EXPECT_FALSE(parse_algorithm("newton").has_value());
}

TEST(Summarize, Statistics) {
  const auto s = summarize({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_DOUBLE_EQ(summarize({5.0, 1.0, 3.0}).median, 3.0);
}

TEST(RunExperiment, Example1FourRowsWithConsistentRecords) {
  ExperimentSpec spec;
  spec.n = 30;
  spec.seed = 7;
  spec.algorithms = {AlgorithmId::Alg1, AlgorithmId::Alg2, AlgorithmId::CQ, AlgorithmId::InertialCQ};
  spec.cfg.max_iter = 2000;
  const auto report = run_experiment(spec);
  ASSERT_EQ(report.rows.size(), 4u);
  const auto inst = build_instance(spec);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& row = report.rows[i];
    EXPECT_EQ(row.algorithm, spec.algorithms[i]);
    ASSERT_EQ(row.runs.size(), 1u);
    const auto& run = row.runs[0];
    EXPECT_EQ(run.iterations, static_cast<int>(run.history.size()));
    const auto gap = feasibility_gap(inst.problem, run.final);
    EXPECT_EQ(run.final_dist_c, gap.dist_c);
    EXPECT_EQ(run.final_gap_q, gap.gap_q);
    EXPECT_EQ(row.succeeded, 1);
  }
  EXPECT_FALSE(report.environment.eigen_version.empty());
}

TEST(RunExperiment, RepetitionsAreBitIdentical) {
  ExperimentSpec spec;
  spec.example = ExampleId::Example3;
  spec.m = 10;
  spec.n = 15;
  spec.seed = 3;
  spec.repetitions = 2;
  spec.algorithms = {AlgorithmId::Alg2, AlgorithmId::ProxGrad};
  spec.cfg.max_iter = 500;
  const auto report = run_experiment(spec);
  for (const auto& row : report.rows) {
    ASSERT_EQ(row.runs.size(), 2u);
    const auto &a = row.runs[0], &b = row.runs[1];
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
      ASSERT_EQ(a.history[k].residual, b.history[k].residual);
      ASSERT_EQ(a.history[k].step, b.history[k].step);
    }
    EXPECT_EQ(a.final, b.final);
    EXPECT_TRUE(a.objective.has_value());
  }
}

TEST(RunExperiment, FailingCellDoesNotStopOthers) {
  const auto r2 = Space::euclidean(2);
  ExperimentSpec spec;
  spec.example = ExampleId::Custom;
  // Entropy over a ball is unsupported: the Bregman schemes fail mid-run,
  // the metric-projection baseline does not.
  spec.custom = ExampleInstance{Problem{.set_c = Set::ball(r2, 1.0),
                                        .set_q = Set::whole_space(r2),
                                        .op = Operator::dense_linear(MatrixXd::Identity(2, 2)),
                                        .f1 = negative_entropy(r2),
                                        .f2 = negative_entropy(r2)},
                                VectorXd{{0.5, 0.5}}};
  spec.algorithms = {AlgorithmId::Alg1, AlgorithmId::CQ};
  const auto report = run_experiment(spec);
  EXPECT_EQ(report.rows[0].succeeded, 0);
  EXPECT_EQ(report.rows[0].runs[0].status, Status::Error);
  EXPECT_EQ(report.rows[1].succeeded, 1);
}

TEST(WorkerThreads, EnvironmentOverride) {
  ::setenv("BREGSFP_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3);
  ::setenv("BREGSFP_THREADS", "zero", 1);
  EXPECT_GE(worker_threads(), 1);
  ::unsetenv("BREGSFP_THREADS");
  EXPECT_GE(worker_threads(), 1);
}
