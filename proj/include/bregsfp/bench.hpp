#pragma once

#include "bregsfp/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bregsfp::bench {

enum class ExampleId { Example1, Example2, Example3, Custom };
enum class AlgorithmId { Alg1, Alg2, CQ, InertialCQ, ProxGrad };

/// Short CLI name: alg1, alg2, cq, icq, proxgrad.
const char* algorithm_name(AlgorithmId a);
/// Table label, e.g. "Proposed Algorithm 1".
const char* algorithm_label(AlgorithmId a);
std::optional<AlgorithmId> parse_algorithm(std::string_view name);

const char* example_name(ExampleId e);

struct ExampleInstance {
  Problem problem;
  VectorXd zeta0;
};

/// C = unit ball, Q = {y : sum y = 0}, A an n x n standard Gaussian matrix;
/// zeta0 ~ U[-1, 1]^n drawn after A from the same stream.
ExampleInstance make_example1(int n, std::uint64_t seed);

/// Discretized L^2([0, 1]) on a trapezoid grid: C = L^2 unit ball,
/// Q = zero-integral functions, A(x)(t) = sin(x(t)) + t x(t),
/// zeta0(t) = 1 + cos(2 pi t).
ExampleInstance make_example2(int grid_points);

/// min ||A x - b||^2 + mu ||x||_1 over the box [-1, 1]^n with A an m x n
/// Gaussian matrix and b a Gaussian vector; zeta0 ~ U[-1, 1]^n. Q is the
/// whole output space.
ExampleInstance make_example3(int m, int n, double mu, std::uint64_t seed);

/// 1 / L_g for the composite instance's smooth term.
double composite_step(const Problem& p);

struct ExperimentSpec {
  ExampleId example = ExampleId::Example1;
  int n = 100;
  int m = 50;
  int grid_points = 128;
  double mu = 0.1;
  std::uint64_t seed = 0;
  std::vector<AlgorithmId> algorithms;
  Config cfg{};
  int repetitions = 1;
  /// For Example 3 the hybrid scheme's eta defaults to 1 / L_g, the same
  /// step the proximal-gradient baseline takes.
  bool auto_eta = true;
  /// Required when example == Custom.
  std::optional<ExampleInstance> custom{};
};

/// Throws ConfigError / DimensionMismatch / RequiresLinearOperator /
/// MissingObjective for specs that cannot run.
void validate(const ExperimentSpec& spec);

ExampleInstance build_instance(const ExperimentSpec& spec);

/// Configuration actually handed to the solvers for this spec.
Config effective_config(const ExperimentSpec& spec, const Problem& p);

SolveResult<double> run_algorithm(AlgorithmId a, const Problem& p, const Config& cfg, const VectorXd& zeta0);

struct Stats {
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Stats summarize(std::vector<double> values);

struct RunRecord {
  Status status = Status::Error;
  std::string error;
  int iterations = 0;
  double elapsed = 0.0;
  double final_dist_c = 0.0;
  double final_gap_q = 0.0;
  std::optional<double> objective{};
  std::vector<IterationRecord<double>> history;
  VectorXd final;
};

struct AlgorithmReport {
  AlgorithmId algorithm;
  std::vector<RunRecord> runs;
  Stats iterations;
  Stats elapsed;
  int succeeded = 0;  // runs without Status::Error
  int converged = 0;
};

struct Environment {
  std::string compiler;
  std::string eigen_version;
  int threads = 1;
};

struct ExperimentReport {
  ExampleId example;
  std::uint64_t seed;
  std::vector<AlgorithmReport> rows;
  Environment environment;
};

/// Number of worker threads: BREGSFP_THREADS when set to a positive
/// integer, otherwise the hardware concurrency.
int worker_threads();

Environment current_environment();

/// Runs every (algorithm, repetition) cell on one shared instance. Cells run
/// in parallel; a failing cell is recorded and does not stop the others.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace bregsfp::bench
