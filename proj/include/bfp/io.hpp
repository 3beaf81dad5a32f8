#pragma once

// File-facing surface: CSV sample ingestion, the run manifest embedded in
// every output, and JSON/CSV serialization of reports and study results.
// Numbers in CSV output carry 17 significant digits so downstream parsing
// round-trips exactly; the JSON writer emits shortest-round-trip doubles.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfp/errors.hpp"
#include "bfp/matrixkit.hpp"
#include "bfp/mltests.hpp"
#include "bfp/montecarlo.hpp"
#include "bfp/solvers.hpp"

namespace bfp {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// %.17g rendering, the shortest form that parses back bit-exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      tokens.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  tokens.push_back(current);
  return tokens;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Rectangular numeric CSV, one observation per row. A non-numeric first
/// row is treated as a header and skipped. Blank lines are ignored.
inline Matrix ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("ingest_csv: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  int cols = -1;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto tokens = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(tokens.size());
    bool numeric = true;
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      const std::string tok = detail::trim(tokens[j]);
      double v = 0.0;
      if (tok.empty() || !detail::parse_double(tok, v)) {
        if (first_content_row) {
          numeric = false;
          break;  // header row
        }
        throw ParseError("ingest_csv: '" + path + "' row " + std::to_string(line_no) +
                         ", column " + std::to_string(j + 1) + ": cannot parse '" + tok + "'");
      }
      if (!std::isfinite(v))
        throw NonFinite("ingest_csv: '" + path + "' row " + std::to_string(line_no) +
                        ", column " + std::to_string(j + 1) + ": non-finite value '" + tok + "'");
      row.push_back(v);
    }
    if (first_content_row) {
      first_content_row = false;
      if (!numeric) continue;  // skip the header
    }
    if (cols < 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols)
      throw RaggedRows("ingest_csv: '" + path + "' row " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " fields, expected " + std::to_string(cols));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("ingest_csv: '" + path + "' contains no data rows");

  Matrix m(static_cast<int>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < cols; ++j) m(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

// ---------------------------------------------------------------------------
// Run manifest

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("file_digest: cannot open '" + path + "'");
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string subcommand;
  nlohmann::json config;  // fully resolved flag values
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_digests;  // (path, digest)
  std::string started_at;
  std::string finished_at;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [path, digest] : m.input_digests)
    inputs.push_back({{"path", path}, {"digest", digest}});
  return nlohmann::json{{"tool_version", m.tool_version}, {"subcommand", m.subcommand},
                        {"config", m.config},             {"seed", m.seed},
                        {"inputs", inputs},               {"started_at", m.started_at},
                        {"finished_at", m.finished_at}};
}

// ---------------------------------------------------------------------------
// Report serialization

inline nlohmann::json to_json(const BfpSolution& sol, bool include_trace) {
  nlohmann::json j{{"mu_hat", sol.mu_hat},
                   {"u1", sol.u1},
                   {"u2", sol.u2},
                   {"f_star", sol.f_star},
                   {"lower_bound", sol.lower_bound},
                   {"gap", sol.gap},
                   {"iterations", sol.iterations},
                   {"tie_detected", sol.tie_detected}};
  if (include_trace) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& rec : sol.trace)
      trace.push_back({{"k", rec.k},
                       {"u1", rec.u1},
                       {"u2", rec.u2},
                       {"f", rec.f},
                       {"f_hat", rec.f_hat},
                       {"gap", rec.gap}});
    j["trace"] = trace;
  }
  return j;
}

inline nlohmann::json to_json(const TestReport& r) {
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& d : r.decisions)
    decisions.push_back({{"statistic", d.statistic},
                         {"alpha", d.alpha},
                         {"reject", d.reject},
                         {"certificate_limited", d.certificate_limited}});
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"kind", "test_report"},
                        {"d", r.d},
                        {"n1", r.n1},
                        {"n2", r.n2},
                        {"statistics",
                         {{"W", r.w}, {"LR0", r.lr0}, {"LR", r.lr}, {"LM", r.lm}, {"B", r.b}}},
                        {"bartlett_c1", r.bartlett_c1},
                        {"solver_gap", r.solver_gap},
                        {"epsilon", r.epsilon},
                        {"p_values", r.p_values},
                        {"decisions", decisions},
                        {"mu_hat", r.mu_hat},
                        {"u1", r.u1},
                        {"u2", r.u2},
                        {"iterations", r.iterations}};
}

inline nlohmann::json to_json(const StudyConfig& c) {
  return nlohmann::json{{"d", c.d},
                        {"n1", c.n1},
                        {"n2", c.resolved_n2()},
                        {"reps", c.reps},
                        {"alphas", c.alphas},
                        {"epsilon", c.epsilon},
                        {"seed", c.seed},
                        {"deltas", c.delta_grid},
                        {"algorithm", c.algorithm == Algorithm::Da ? "da" : "cla"},
                        {"threads", c.threads},
                        {"relative_gap", c.relative_gap},
                        {"successes", c.stop_successes},
                        {"heuristics", c.heuristics},
                        {"sa_iters", c.sa_iters}};
}

inline nlohmann::json to_json(const StudyResult& r) {
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& e : r.rates)
    rates.push_back({{"test", e.test},
                     {"alpha", e.alpha},
                     {"delta", e.delta},
                     {"rate", e.rate},
                     {"stderr", e.std_error},
                     {"reps", e.reps}});
  nlohmann::json quartiles = nlohmann::json::array();
  for (const auto& e : r.quartiles)
    quartiles.push_back({{"test", e.test},
                         {"delta", e.delta},
                         {"q25", e.q25},
                         {"q50", e.q50},
                         {"q75", e.q75}});
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& e : r.timings)
    timings.push_back({{"algorithm", e.algorithm},
                       {"mean_seconds", e.mean_seconds},
                       {"mean_iterations", e.mean_iterations}});
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"kind", "study_result"},
                        {"study", r.study},
                        {"config", to_json(r.config)},
                        {"rates", rates},
                        {"quartiles", quartiles},
                        {"timings", timings},
                        {"excluded", r.excluded},
                        {"reps_run", r.reps_run},
                        {"wall_seconds", r.wall_seconds}};
}

/// Tidy CSV: one row per (test, alpha, delta). Column order is part of the
/// output contract.
inline std::string study_rates_csv(const StudyResult& r) {
  std::ostringstream out;
  out << "test,alpha,delta,rate,stderr,reps,seed\n";
  for (const auto& e : r.rates)
    out << e.test << ',' << format_double(e.alpha) << ',' << format_double(e.delta) << ','
        << format_double(e.rate) << ',' << format_double(e.std_error) << ',' << e.reps << ','
        << r.config.seed << '\n';
  return out.str();
}

/// Timing studies emit their own CSV layout.
inline std::string study_timings_csv(const StudyResult& r) {
  std::ostringstream out;
  out << "algorithm,mean_seconds,mean_iterations,reps,seed\n";
  for (const auto& e : r.timings)
    out << e.algorithm << ',' << format_double(e.mean_seconds) << ','
        << format_double(e.mean_iterations) << ',' << r.reps_run << ',' << r.config.seed << '\n';
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

}  // namespace bfp
