#include "bregsfp/cli.hpp"

#include "bregsfp/bench.hpp"
#include "bregsfp/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef BREGSFP_DEFAULT_GOLDEN_DIR
#define BREGSFP_DEFAULT_GOLDEN_DIR "tests/golden"
#endif

namespace bregsfp::cli {

namespace fs = std::filesystem;
using bench::AlgorithmId;
using bench::ExampleId;
using bench::ExperimentSpec;

namespace {

struct ProblemOptions {
  int example = 1;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<int> grid;
  double mu = 0.1;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iter = 10000;
  double beta = 0.5;
  double tau = 0.5;
  std::optional<double> eta;
  double iota0 = 1.0;
  std::string anchor = "initial";
  bool no_step_cap = false;
  bool paper_scale = false;
  std::string config;
};

void add_problem_options(CLI::App* app, ProblemOptions& o) {
  app->add_option("--example", o.example, "Experiment: 1 (linear SFP), 2 (nonlinear L2 SFP), 3 (composite)")
      ->check(CLI::IsMember({1, 2, 3}));
  app->add_option("--n", o.n, "Dimension of H1 (examples 1 and 3)");
  app->add_option("--m", o.m, "Rows of A (example 3)");
  app->add_option("--grid", o.grid, "Grid points on [0, 1] (example 2)");
  app->add_option("--mu", o.mu, "l1 weight (example 3)");
  app->add_option("--seed", o.seed, "64-bit instance seed");
  app->add_option("--tol", o.tol, "Stop when ||z_{n+1} - z_n|| < tol");
  app->add_option("--max-iter", o.max_iter, "Iteration budget");
  app->add_option("--beta", o.beta, "Constant inertial weight");
  app->add_option("--tau", o.tau, "Line-search parameter in (0, 1)");
  app->add_option("--eta", o.eta, "Prox step of the hybrid scheme (default 0.1; 1/L_g for example 3)");
  app->add_option("--iota0", o.iota0, "Initial line-search step");
  app->add_option("--anchor", o.anchor, "Anchor of the update: initial or latest")
      ->check(CLI::IsMember({"initial", "latest"}));
  app->add_flag("--no-step-cap", o.no_step_cap, "Do not cap the trial step by the Lipschitz bound");
  app->add_flag("--paper-scale", o.paper_scale, "Use n = 1000 (example 1) and m = 500, n = 1000 (example 3)");
  app->add_option("--config", o.config, "key=value file; command-line flags take precedence");
}

ExampleId example_id(int e) {
  switch (e) {
    case 1: return ExampleId::Example1;
    case 2: return ExampleId::Example2;
    default: return ExampleId::Example3;
  }
}

ExperimentSpec make_spec(const ProblemOptions& o, std::vector<AlgorithmId> algorithms) {
  ExperimentSpec spec;
  spec.example = example_id(o.example);
  const bool big = o.paper_scale;
  if (spec.example == ExampleId::Example3) {
    spec.n = o.n.value_or(big ? 1000 : 100);
    spec.m = o.m.value_or(big ? 500 : 50);
  } else {
    spec.n = o.n.value_or(big ? 1000 : 100);
  }
  spec.grid_points = o.grid.value_or(128);
  spec.mu = o.mu;
  spec.seed = o.seed;
  spec.algorithms = std::move(algorithms);
  spec.cfg.tol = o.tol;
  spec.cfg.max_iter = o.max_iter;
  spec.cfg.beta = Schedule<double>::constant(o.beta);
  spec.cfg.tau = o.tau;
  spec.cfg.linesearch.initial_step = o.iota0;
  spec.cfg.anchor = o.anchor == "latest" ? Anchor::Latest : Anchor::Initial;
  spec.cfg.cap_step_by_lipschitz = !o.no_step_cap;
  if (o.eta) {
    spec.cfg.eta = *o.eta;
    spec.auto_eta = false;
  }
  return spec;
}

/// Inserts "--key=value" tokens from a --config file directly after the
/// subcommand, so anything on the real command line (parsed later, last
/// value wins) overrides the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path || args.empty()) return args;
  std::ifstream in(*path);
  if (!in) throw Error("cannot read config file " + *path);
  const auto kv = io::parse_key_value(in);
  std::vector<std::string> out{args.front()};
  for (const auto& [k, v] : kv) {
    if (k == "config") continue;
    std::string flag = k;  // max_iter and max-iter both name --max-iter
    std::replace(flag.begin(), flag.end(), '_', '-');
    out.push_back("--" + flag + "=" + v);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << content;
  if (!os) throw Error("failed writing " + path.string());
}

std::string history_text(const std::vector<IterationRecord<double>>& h) {
  std::ostringstream ss;
  io::write_history_csv(ss, h);
  return ss.str();
}

int solve(const ProblemOptions& o, const std::string& algorithm, const std::string& out_dir, std::ostream& out,
          std::ostream& err) {
  const auto alg = bench::parse_algorithm(algorithm);
  if (!alg) {
    err << "unknown algorithm '" << algorithm << "' (expected alg1, alg2, cq, icq, proxgrad)\n";
    return kUsage;
  }
  ExperimentSpec spec = make_spec(o, {*alg});
  try {
    bench::validate(spec);
  } catch (const Error& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return kUsage;
  }

  bench::ExperimentReport report;
  Config cfg;
  try {
    report = bench::run_experiment(spec);
    cfg = bench::effective_config(spec, bench::build_instance(spec).problem);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRunError;
  }
  const auto& run = report.rows.front().runs.front();

  io::RunSummary summary;
  summary.example = bench::example_name(spec.example);
  summary.algorithm = bench::algorithm_name(*alg);
  summary.seed = spec.seed;
  summary.n = spec.example == ExampleId::Example2 ? spec.grid_points : spec.n;
  summary.status = to_string(run.status);
  summary.iterations = run.iterations;
  summary.elapsed_seconds = run.elapsed;
  summary.final_dist_c = run.final_dist_c;
  summary.final_gap_q = run.final_gap_q;
  summary.config = io::describe(cfg);

  try {
    const fs::path dir(out_dir);
    ensure_dir(dir);
    write_file(dir / "history.csv", history_text(run.history));
    write_file(dir / "summary.json", io::to_json(summary) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRunError;
  }

  out << summary.algorithm << " on example " << summary.example << ": " << summary.status << " after "
      << run.iterations << " iterations (" << run.elapsed << " s), dist_C = " << run.final_dist_c
      << ", gap_Q = " << run.final_gap_q << '\n';
  if (run.status == Status::Error) {
    err << "solver error: " << run.error << '\n';
    return kRunError;
  }
  return run.status == Status::Converged ? kOk : kNotConverged;
}

int compare(const ProblemOptions& o, const std::vector<std::string>& names, int repetitions,
            const std::string& format, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::vector<AlgorithmId> algs;
  for (const auto& name : names) {
    const auto a = bench::parse_algorithm(name);
    if (!a) {
      err << "unknown algorithm '" << name << "' (expected alg1, alg2, cq, icq, proxgrad)\n";
      return kUsage;
    }
    algs.push_back(*a);
  }
  ExperimentSpec spec = make_spec(o, std::move(algs));
  spec.repetitions = repetitions;
  try {
    bench::validate(spec);
  } catch (const Error& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return kUsage;
  }

  bench::ExperimentReport report;
  Config cfg;
  try {
    report = bench::run_experiment(spec);
    cfg = bench::effective_config(spec, bench::build_instance(spec).problem);
    const fs::path dir(out_dir);
    ensure_dir(dir);
    if (format == "json") {
      write_file(dir / "summary.json", io::table_json(report, cfg) + "\n");
    } else {
      std::ostringstream ss;
      io::write_table_csv(ss, report);
      write_file(dir / "summary.csv", ss.str());
    }
    for (const auto& row : report.rows) {
      if (row.runs.empty()) continue;
      write_file(dir / (std::string("history_") + bench::algorithm_name(row.algorithm) + ".csv"),
                 history_text(row.runs.front().history));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRunError;
  }

  io::print_table(out, report);
  int ok = 0;
  for (const auto& row : report.rows) {
    ok += row.succeeded;
    for (const auto& r : row.runs) {
      if (r.status == Status::Error) err << bench::algorithm_name(row.algorithm) << ": " << r.error << '\n';
    }
  }
  return ok > 0 ? kOk : kAllCellsFailed;
}

struct GoldenCase {
  std::string name;
  ExperimentSpec spec;
  std::string file;
};

std::vector<GoldenCase> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing golden manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    std::vector<GoldenCase> cases;
    for (const auto& c : j.at("cases")) {
      GoldenCase g;
      g.name = c.at("name").get<std::string>();
      g.file = c.at("file").get<std::string>();
      const auto alg = bench::parse_algorithm(c.at("algorithm").get<std::string>());
      if (!alg) throw Error("golden case " + g.name + ": unknown algorithm");
      g.spec.example = example_id(c.at("example").get<int>());
      g.spec.algorithms = {*alg};
      g.spec.n = c.value("n", 100);
      g.spec.m = c.value("m", 50);
      g.spec.grid_points = c.value("grid", 128);
      g.spec.mu = c.value("mu", 0.1);
      g.spec.seed = c.value("seed", std::uint64_t{0});
      g.spec.cfg.tol = c.value("tol", 1e-6);
      g.spec.cfg.max_iter = c.value("max_iter", 10000);
      cases.push_back(std::move(g));
    }
    return cases;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed golden manifest: " + std::string(e.what()));
  }
}

int verify(const std::string& golden_dir, std::optional<double> tol, bool write, std::ostream& out,
           std::ostream& err) {
  const fs::path dir(golden_dir);
  std::vector<GoldenCase> cases;
  try {
    cases = read_manifest(dir / "manifest.json");
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  int mismatches = 0;
  for (auto& c : cases) {
    if (tol) c.spec.cfg.tol = *tol;
    const fs::path file = dir / c.file;
    std::vector<io::HistoryRow> golden;
    if (!write) {
      std::ifstream in(file);
      if (!in) {
        err << "missing golden file " << file.string() << '\n';
        return kUsage;
      }
      try {
        golden = io::read_history_csv(in);
      } catch (const Error& e) {
        err << file.string() << ": " << e.what() << '\n';
        return kUsage;
      }
    }

    bench::ExperimentReport report;
    try {
      report = bench::run_experiment(c.spec);
    } catch (const Error& e) {
      err << c.name << ": " << e.what() << '\n';
      return kRunError;
    }
    const auto& history = report.rows.front().runs.front().history;

    if (write) {
      try {
        write_file(file, history_text(history));
      } catch (const Error& e) {
        err << e.what() << '\n';
        return kRunError;
      }
      out << "wrote " << c.name << " (" << history.size() << " rows)\n";
      continue;
    }
    if (const auto d = io::compare_histories(golden, io::to_rows(history))) {
      ++mismatches;
      out << "MISMATCH " << c.name << ": first divergent iteration " << d->iteration << " (" << d->message
          << ")\n";
    } else {
      out << "ok " << c.name << " (" << history.size() << " iterations)\n";
    }
  }
  return mismatches == 0 ? kOk : kGoldenMismatch;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bregman projection solvers for split feasibility problems", "bregsfp"};
  app.require_subcommand(1);

  ProblemOptions solve_opts;
  std::string solve_alg;
  std::string solve_out = "runs/solve";
  auto* solve_cmd = app.add_subcommand("solve", "Run one algorithm on one instance");
  solve_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_problem_options(solve_cmd, solve_opts);
  solve_cmd->add_option("--algorithm", solve_alg, "alg1, alg2, cq, icq or proxgrad")->required();
  solve_cmd->add_option("--out", solve_out, "Output directory");

  ProblemOptions cmp_opts;
  std::vector<std::string> cmp_algs;
  int cmp_reps = 1;
  std::string cmp_format = "csv";
  std::string cmp_out = "runs/compare";
  auto* cmp_cmd = app.add_subcommand("compare", "Run several algorithms on one shared instance");
  cmp_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_problem_options(cmp_cmd, cmp_opts);
  cmp_cmd->add_option("--algorithms", cmp_algs, "Comma-separated list")->delimiter(',')->required();
  cmp_cmd->add_option("--repetitions", cmp_reps, "Repetitions per algorithm")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--format", cmp_format, "Summary table format")->check(CLI::IsMember({"csv", "json"}));
  cmp_cmd->add_option("--out", cmp_out, "Output directory");

  std::string golden_dir = BREGSFP_DEFAULT_GOLDEN_DIR;
  std::optional<double> verify_tol;
  bool verify_write = false;
  auto* verify_cmd = app.add_subcommand("verify", "Re-run pinned cases and compare with golden histories");
  verify_cmd->add_option("--golden-dir", golden_dir, "Directory holding manifest.json");
  verify_cmd->add_option("--tol", verify_tol, "Override every case's tolerance");
  verify_cmd->add_flag("--write", verify_write, "Regenerate the golden histories instead of checking");

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  // CLI11 expects reverse order for vector input.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  if (solve_cmd->parsed()) return solve(solve_opts, solve_alg, solve_out, out, err);
  if (cmp_cmd->parsed()) return compare(cmp_opts, cmp_algs, cmp_reps, cmp_format, cmp_out, out, err);
  return verify(golden_dir, verify_tol, verify_write, out, err);
}

}  // namespace bregsfp::cli
