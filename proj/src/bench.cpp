#include "bregsfp/bench.hpp"

#include "bregsfp/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

namespace bregsfp::bench {

const char* algorithm_name(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::Alg1: return "alg1";
    case AlgorithmId::Alg2: return "alg2";
    case AlgorithmId::CQ: return "cq";
    case AlgorithmId::InertialCQ: return "icq";
    case AlgorithmId::ProxGrad: return "proxgrad";
  }
  return "?";
}

const char* algorithm_label(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::Alg1: return "Proposed Algorithm 1";
    case AlgorithmId::Alg2: return "Proposed Algorithm 2";
    case AlgorithmId::CQ: return "Classical CQ";
    case AlgorithmId::InertialCQ: return "Inertial CQ";
    case AlgorithmId::ProxGrad: return "Proximal Gradient Method";
  }
  return "?";
}

std::optional<AlgorithmId> parse_algorithm(std::string_view name) {
  for (auto a : {AlgorithmId::Alg1, AlgorithmId::Alg2, AlgorithmId::CQ, AlgorithmId::InertialCQ,
                 AlgorithmId::ProxGrad}) {
    if (name == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

const char* example_name(ExampleId e) {
  switch (e) {
    case ExampleId::Example1: return "1";
    case ExampleId::Example2: return "2";
    case ExampleId::Example3: return "3";
    case ExampleId::Custom: return "custom";
  }
  return "?";
}

ExampleInstance make_example1(int n, std::uint64_t seed) {
  if (n < 2) throw DimensionMismatch("example 1 needs dimension n >= 2, got " + std::to_string(n));
  SeededStream rng(seed);
  MatrixXd a = rng.gaussian_matrix(n, n);
  VectorXd zeta0 = rng.uniform_vector(n, -1.0, 1.0);
  const auto space = Space::euclidean(n);
  Problem p{
      .set_c = Set::ball(space, 1.0),
      .set_q = Set::zero_mean(space),
      .op = Operator::dense_linear(std::move(a), space, space),
      .f1 = Legendre::half_squared_norm(space),
      .f2 = Legendre::half_squared_norm(space),
      .reference = VectorXd::Zero(n),
  };
  return {std::move(p), std::move(zeta0)};
}

ExampleInstance make_example2(int grid_points) {
  if (grid_points < 16) {
    throw DimensionMismatch("example 2 needs at least 16 grid points, got " + std::to_string(grid_points));
  }
  const auto space = Space::trapezoid(grid_points);
  const VectorXd& t = *space.nodes();
  VectorXd zeta0 = (1.0 + (2.0 * std::numbers::pi * t.array()).cos()).matrix();
  Problem p{
      .set_c = Set::ball(space, 1.0),
      .set_q = Set::zero_mean(space),
      .op = Operator::sine_multiplier(space),
      .f1 = Legendre::half_squared_norm(space),
      .f2 = Legendre::half_squared_norm(space),
      .reference = VectorXd::Zero(grid_points),
  };
  return {std::move(p), std::move(zeta0)};
}

ExampleInstance make_example3(int m, int n, double mu, std::uint64_t seed) {
  if (m < 2 || n < 2) {
    throw DimensionMismatch("example 3 needs m, n >= 2, got m=" + std::to_string(m) + " n=" + std::to_string(n));
  }
  if (!(mu >= 0.0)) throw ConfigError("example 3 regularization weight must be nonnegative");
  SeededStream rng(seed);
  MatrixXd a = rng.gaussian_matrix(m, n);
  VectorXd b = rng.gaussian_vector(m);
  VectorXd zeta0 = rng.uniform_vector(n, -1.0, 1.0);
  const auto in = Space::euclidean(n);
  const auto out = Space::euclidean(m);
  auto op = Operator::dense_linear(std::move(a), in, out);
  auto objective = SmoothObjective<double>::from(least_squares_objective(op, std::move(b)));
  Problem p{
      .set_c = Set::box(in, -1.0, 1.0),
      .set_q = Set::whole_space(out),
      .op = std::move(op),
      .f1 = Legendre::half_squared_norm(in),
      .f2 = Legendre::half_squared_norm(out),
      .regularizer = Proximable::l1(mu),
      .objective = std::move(objective),
  };
  return {std::move(p), std::move(zeta0)};
}

double composite_step(const Problem& p) {
  if (!p.objective) throw MissingObjective("instance has no smooth objective");
  const double lg = p.objective->gradient_lipschitz;
  return lg > 0.0 ? 1.0 / lg : 1.0;
}

void validate(const ExperimentSpec& spec) {
  require(!spec.algorithms.empty(), "experiment needs at least one algorithm");
  require(spec.repetitions >= 1, "repetitions must be at least 1");
  bregsfp::validate(spec.cfg);
  switch (spec.example) {
    case ExampleId::Example1:
      if (spec.n < 2) throw DimensionMismatch("example 1 needs dimension n >= 2, got " + std::to_string(spec.n));
      break;
    case ExampleId::Example2:
      if (spec.grid_points < 16) throw DimensionMismatch("example 2 needs at least 16 grid points");
      break;
    case ExampleId::Example3:
      if (spec.m < 2 || spec.n < 2) throw DimensionMismatch("example 3 needs m, n >= 2");
      require(spec.mu >= 0.0, "regularization weight must be nonnegative");
      break;
    case ExampleId::Custom:
      require(spec.custom.has_value(), "custom experiment needs an instance");
      break;
  }
  const bool linear = spec.example != ExampleId::Example2 &&
                      (spec.example != ExampleId::Custom || spec.custom->problem.op.is_linear());
  const bool has_objective = spec.example == ExampleId::Example3 ||
                             (spec.example == ExampleId::Custom && spec.custom->problem.objective.has_value());
  for (auto a : spec.algorithms) {
    if ((a == AlgorithmId::CQ || a == AlgorithmId::InertialCQ) && !linear) {
      throw RequiresLinearOperator(std::string(algorithm_name(a)) + " requires a linear operator");
    }
    if (a == AlgorithmId::ProxGrad && !has_objective) {
      throw MissingObjective("proxgrad requires a smooth objective");
    }
  }
}

ExampleInstance build_instance(const ExperimentSpec& spec) {
  switch (spec.example) {
    case ExampleId::Example1: return make_example1(spec.n, spec.seed);
    case ExampleId::Example2: return make_example2(spec.grid_points);
    case ExampleId::Example3: return make_example3(spec.m, spec.n, spec.mu, spec.seed);
    case ExampleId::Custom: break;
  }
  if (!spec.custom) throw ConfigError("custom experiment needs an instance");
  return *spec.custom;
}

Config effective_config(const ExperimentSpec& spec, const Problem& p) {
  Config cfg = spec.cfg;
  if (spec.auto_eta && spec.example == ExampleId::Example3) cfg.eta = composite_step(p);
  return cfg;
}

SolveResult<double> run_algorithm(AlgorithmId a, const Problem& p, const Config& cfg, const VectorXd& zeta0) {
  switch (a) {
    case AlgorithmId::Alg1: return solve_algorithm1(p, cfg, zeta0);
    case AlgorithmId::Alg2: return solve_algorithm2(p, cfg, zeta0);
    case AlgorithmId::CQ: return solve_cq(p, cfg, zeta0);
    case AlgorithmId::InertialCQ: return solve_inertial_cq(p, cfg, zeta0);
    case AlgorithmId::ProxGrad: return solve_proximal_gradient(p, cfg, zeta0);
  }
  throw ConfigError("unknown algorithm");
}

Stats summarize(std::vector<double> values) {
  Stats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto k = values.size();
  s.median = k % 2 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(k);
  s.min = values.front();
  s.max = values.back();
  return s;
}

int worker_threads() {
  if (const char* env = std::getenv("BREGSFP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Environment current_environment() {
  Environment env;
#if defined(__clang__)
  env.compiler = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env.compiler = std::string("gcc ") + __VERSION__;
#else
  env.compiler = "unknown";
#endif
  env.eigen_version = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  env.threads = worker_threads();
  return env;
}

namespace {

RunRecord run_cell(AlgorithmId a, const Problem& p, const Config& cfg, const VectorXd& zeta0) {
  RunRecord rec;
  try {
    auto res = run_algorithm(a, p, cfg, zeta0);
    rec.status = res.status;
    rec.error = res.error;
    rec.iterations = res.iterations;
    rec.elapsed = res.elapsed;
    const auto gap = feasibility_gap(p, res.final);
    rec.final_dist_c = gap.dist_c;
    rec.final_gap_q = gap.gap_q;
    if (p.objective) rec.objective = p.composite_value(res.final);
    rec.history = std::move(res.history);
    rec.final = std::move(res.final);
  } catch (const Error& e) {
    rec.status = Status::Error;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const ExampleInstance inst = build_instance(spec);
  const Config cfg = effective_config(spec, inst.problem);

  const int n_alg = static_cast<int>(spec.algorithms.size());
  const int n_cells = n_alg * spec.repetitions;
  std::vector<RunRecord> cells(static_cast<std::size_t>(n_cells));

  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int c = next.fetch_add(1); c < n_cells; c = next.fetch_add(1)) {
      const auto alg = spec.algorithms[static_cast<std::size_t>(c / spec.repetitions)];
      cells[static_cast<std::size_t>(c)] = run_cell(alg, inst.problem, cfg, inst.zeta0);
    }
  };
  const int n_threads = std::max(1, std::min(worker_threads(), n_cells));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  ExperimentReport report{spec.example, spec.seed, {}, current_environment()};
  for (int i = 0; i < n_alg; ++i) {
    AlgorithmReport row{spec.algorithms[static_cast<std::size_t>(i)], {}, {}, {}, 0, 0};
    std::vector<double> iters;
    std::vector<double> times;
    for (int r = 0; r < spec.repetitions; ++r) {
      auto& cell = cells[static_cast<std::size_t>(i * spec.repetitions + r)];
      if (cell.status != Status::Error) {
        ++row.succeeded;
        iters.push_back(cell.iterations);
        times.push_back(cell.elapsed);
      }
      if (cell.status == Status::Converged) ++row.converged;
      row.runs.push_back(std::move(cell));
    }
    row.iterations = summarize(std::move(iters));
    row.elapsed = summarize(std::move(times));
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace bregsfp::bench
