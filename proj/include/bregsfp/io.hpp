#pragma once

#include "bregsfp/bench.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bregsfp::io {

inline constexpr const char* kHistoryHeader = "iter,residual,dist_C,gap_Q,step,backtracks";

/// 17 significant digits, enough for an exact double round trip.
std::string format_double(double x);

struct HistoryRow {
  int iter = 0;
  double residual = 0.0;
  double dist_c = 0.0;
  double gap_q = 0.0;
  double step = 0.0;
  int backtracks = 0;
};

void write_history_csv(std::ostream& os, const std::vector<IterationRecord<double>>& history);
/// Throws bregsfp::Error on a malformed header or row.
std::vector<HistoryRow> read_history_csv(std::istream& is);
std::vector<HistoryRow> to_rows(const std::vector<IterationRecord<double>>& history);

/// One solver run, as written next to its history file.
struct RunSummary {
  std::string example;
  std::string algorithm;
  std::uint64_t seed = 0;
  int n = 0;
  std::string status;
  int iterations = 0;
  double elapsed_seconds = 0.0;
  double final_dist_c = 0.0;
  double final_gap_q = 0.0;
  std::map<std::string, std::string> config;

  bool operator==(const RunSummary&) const = default;
};

std::string to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);

/// Flat key/value view of a solver configuration for summaries.
std::map<std::string, std::string> describe(const Config& cfg);

/// First point where two histories disagree, if any.
struct Divergence {
  int iteration = 0;  // 1-based row; 0 when only the lengths differ
  std::string column;
  double expected = 0.0;
  double actual = 0.0;
  std::string message;
};

/// Numeric columns must match to rel_tol relative (exact zeros must
/// match exactly); backtracks and lengths must match exactly.
std::optional<Divergence> compare_histories(const std::vector<HistoryRow>& golden,
                                            const std::vector<HistoryRow>& fresh, double rel_tol = 1e-10);

/// Summary table shaped like "Method, Iterations, CPU Time".
void write_table_csv(std::ostream& os, const bench::ExperimentReport& report);
std::string table_json(const bench::ExperimentReport& report, const Config& cfg);
void print_table(std::ostream& os, const bench::ExperimentReport& report);

/// key=value lines; '#' starts a comment. Throws bregsfp::Error on lines
/// without '='.
std::map<std::string, std::string> parse_key_value(std::istream& is);

}  // namespace bregsfp::io
