#include "bregsfp/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bregsfp::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord<double>>& history) {
  os << kHistoryHeader << '\n';
  for (const auto& r : history) {
    os << r.n << ',' << format_double(r.residual) << ',' << format_double(r.dist_c) << ','
       << format_double(r.gap_q) << ',' << format_double(r.step) << ',' << r.backtracks << '\n';
  }
}

std::vector<HistoryRow> to_rows(const std::vector<IterationRecord<double>>& history) {
  std::vector<HistoryRow> rows;
  rows.reserve(history.size());
  for (const auto& r : history) rows.push_back({r.n, r.residual, r.dist_c, r.gap_q, r.step, r.backtracks});
  return rows;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line_no) {
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error("history csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
}

int parse_int(const std::string& s, int line_no) {
  std::size_t used = 0;
  try {
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error("history csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<HistoryRow> read_history_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kHistoryHeader) {
    throw Error("history csv: missing or unexpected header");
  }
  std::vector<HistoryRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw Error("history csv line " + std::to_string(line_no) + ": expected 6 columns");
    rows.push_back({parse_int(cells[0], line_no), parse_double(cells[1], line_no), parse_double(cells[2], line_no),
                    parse_double(cells[3], line_no), parse_double(cells[4], line_no),
                    parse_int(cells[5], line_no)});
  }
  return rows;
}

std::string to_json(const RunSummary& s) {
  json j{{"example", s.example},
         {"algorithm", s.algorithm},
         {"seed", s.seed},
         {"n", s.n},
         {"status", s.status},
         {"iterations", s.iterations},
         {"elapsed_seconds", s.elapsed_seconds},
         {"final_dist_C", s.final_dist_c},
         {"final_gap_Q", s.final_gap_q},
         {"final_gaps", {{"dist_C", s.final_dist_c}, {"gap_Q", s.final_gap_q}}},
         {"config", s.config}};
  return j.dump(2);
}

RunSummary summary_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    RunSummary s;
    s.example = j.at("example").get<std::string>();
    s.algorithm = j.at("algorithm").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n = j.at("n").get<int>();
    s.status = j.at("status").get<std::string>();
    s.iterations = j.at("iterations").get<int>();
    s.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    s.final_dist_c = j.at("final_dist_C").get<double>();
    s.final_gap_q = j.at("final_gap_Q").get<double>();
    s.config = j.at("config").get<std::map<std::string, std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("summary json: ") + e.what());
  }
}

std::map<std::string, std::string> describe(const Config& cfg) {
  using Form = Schedule<double>::Form;
  const auto schedule = [](const Schedule<double>& s) -> std::string {
    switch (s.form) {
      case Form::Harmonic: return "1/(n+1)";
      case Form::Constant: return format_double(s.constant_value);
      case Form::Custom: return "custom";
    }
    return "custom";
  };
  const char* source = "auto";
  switch (cfg.prox_gradient) {
    case ProxGradientSource::Auto: source = "auto"; break;
    case ProxGradientSource::Legendre: source = "legendre"; break;
    case ProxGradientSource::Objective: source = "objective"; break;
    case ProxGradientSource::Disabled: source = "disabled"; break;
  }
  return {{"mu", schedule(cfg.mu)},
          {"beta", schedule(cfg.beta)},
          {"beta_max", format_double(cfg.beta_max)},
          {"tau", format_double(cfg.tau)},
          {"eta", format_double(cfg.eta)},
          {"iota0", format_double(cfg.linesearch.initial_step)},
          {"backtrack", format_double(cfg.linesearch.backtrack)},
          {"max_backtracks", std::to_string(cfg.linesearch.max_backtracks)},
          {"tol", format_double(cfg.tol)},
          {"max_iter", std::to_string(cfg.max_iter)},
          {"step_cap", cfg.cap_step_by_lipschitz ? "true" : "false"},
          {"anchor", cfg.anchor == Anchor::Initial ? "initial" : "latest"},
          {"prox_gradient", source}};
}

namespace {

bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::optional<Divergence> compare_histories(const std::vector<HistoryRow>& golden,
                                            const std::vector<HistoryRow>& fresh, double rel_tol) {
  const std::size_t common = std::min(golden.size(), fresh.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto& g = golden[i];
    const auto& f = fresh[i];
    const int it = static_cast<int>(i) + 1;
    const auto numeric = [&](const char* col, double a, double b) -> std::optional<Divergence> {
      if (close_rel(a, b, rel_tol)) return std::nullopt;
      return Divergence{it, col, a, b,
                        "iteration " + std::to_string(it) + ": " + col + " expected " + format_double(a) +
                            ", got " + format_double(b)};
    };
    if (g.iter != f.iter) {
      return Divergence{it, "iter", double(g.iter), double(f.iter),
                        "row " + std::to_string(it) + ": iteration index mismatch"};
    }
    if (auto d = numeric("residual", g.residual, f.residual)) return d;
    if (auto d = numeric("dist_C", g.dist_c, f.dist_c)) return d;
    if (auto d = numeric("gap_Q", g.gap_q, f.gap_q)) return d;
    if (auto d = numeric("step", g.step, f.step)) return d;
    if (g.backtracks != f.backtracks) {
      return Divergence{it, "backtracks", double(g.backtracks), double(f.backtracks),
                        "iteration " + std::to_string(it) + ": backtracks expected " +
                            std::to_string(g.backtracks) + ", got " + std::to_string(f.backtracks)};
    }
  }
  if (golden.size() != fresh.size()) {
    const int it = static_cast<int>(common) + 1;
    return Divergence{it, "length", double(golden.size()), double(fresh.size()),
                      "history length expected " + std::to_string(golden.size()) + ", got " +
                          std::to_string(fresh.size())};
  }
  return std::nullopt;
}

namespace {

const bench::RunRecord* first_run(const bench::AlgorithmReport& row) {
  return row.runs.empty() ? nullptr : &row.runs.front();
}

std::string row_status(const bench::AlgorithmReport& row) {
  if (row.runs.empty()) return "none";
  const auto* r = first_run(row);
  if (row.succeeded == 0) return std::string("Error: ") + r->error;
  return to_string(r->status);
}

}  // namespace

void write_table_csv(std::ostream& os, const bench::ExperimentReport& report) {
  os << "method,algorithm,iterations,cpu_time_seconds,status,converged_runs,runs,final_dist_C,final_gap_Q,"
        "objective\n";
  for (const auto& row : report.rows) {
    const auto* r = first_run(row);
    std::string status = row_status(row);
    for (auto& c : status)
      if (c == ',' || c == '\n') c = ';';
    os << bench::algorithm_label(row.algorithm) << ',' << bench::algorithm_name(row.algorithm) << ','
       << format_double(row.iterations.median) << ',' << format_double(row.elapsed.median) << ',' << status << ','
       << row.converged << ',' << row.runs.size() << ',' << format_double(r ? r->final_dist_c : 0.0) << ','
       << format_double(r ? r->final_gap_q : 0.0) << ','
       << (r && r->objective ? format_double(*r->objective) : std::string()) << '\n';
  }
}

std::string table_json(const bench::ExperimentReport& report, const Config& cfg) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json runs = json::array();
    for (const auto& r : row.runs) {
      json jr{{"status", to_string(r.status)},
              {"iterations", r.iterations},
              {"elapsed_seconds", r.elapsed},
              {"final_dist_C", r.final_dist_c},
              {"final_gap_Q", r.final_gap_q}};
      if (!r.error.empty()) jr["error"] = r.error;
      if (r.objective) jr["objective"] = *r.objective;
      runs.push_back(std::move(jr));
    }
    rows.push_back({{"method", bench::algorithm_label(row.algorithm)},
                    {"algorithm", bench::algorithm_name(row.algorithm)},
                    {"iterations",
                     {{"median", row.iterations.median},
                      {"mean", row.iterations.mean},
                      {"min", row.iterations.min},
                      {"max", row.iterations.max}}},
                    {"cpu_time_seconds",
                     {{"median", row.elapsed.median},
                      {"mean", row.elapsed.mean},
                      {"min", row.elapsed.min},
                      {"max", row.elapsed.max}}},
                    {"converged_runs", row.converged},
                    {"succeeded_runs", row.succeeded},
                    {"runs", std::move(runs)}});
  }
  json j{{"example", bench::example_name(report.example)},
         {"seed", report.seed},
         {"config", describe(cfg)},
         {"environment",
          {{"compiler", report.environment.compiler},
           {"eigen", report.environment.eigen_version},
           {"threads", report.environment.threads}}},
         {"rows", std::move(rows)}};
  return j.dump(2);
}

void print_table(std::ostream& os, const bench::ExperimentReport& report) {
  os << std::left << std::setw(28) << "Method" << std::right << std::setw(12) << "Iterations" << std::setw(14)
     << "CPU Time (s)" << "  " << "Status" << '\n';
  for (const auto& row : report.rows) {
    os << std::left << std::setw(28) << bench::algorithm_label(row.algorithm) << std::right << std::setw(12)
       << row.iterations.median << std::setw(14) << std::setprecision(4) << row.elapsed.median << "  "
       << row_status(row) << '\n';
  }
}

std::map<std::string, std::string> parse_key_value(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace bregsfp::io
