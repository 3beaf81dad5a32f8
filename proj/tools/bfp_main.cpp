// Command-line front end: ingest CSV samples, run the certified solver and
// the four tests, and drive the seeded simulation studies.
//
// Exit codes: 0 success, 1 internal error, 2 invalid or degenerate input,
// 3 configuration error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bfp/bfp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitBadConfig = 3;

struct CommonOut {
  std::string out;  // empty → stdout
};

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
  } else {
    bfp::write_text_file(out_path, payload);
  }
}

std::string test_report_csv(const bfp::TestReport& r) {
  std::ostringstream out;
  out << "statistic,value,p_value,alpha,reject,certificate_limited\n";
  for (const auto& d : r.decisions) {
    const double value = d.statistic == "W"     ? r.w
                         : d.statistic == "LR0" ? r.lr0
                         : d.statistic == "LR"  ? r.lr
                         : d.statistic == "LM"  ? r.lm
                                                : r.b;
    out << d.statistic << ',' << bfp::format_double(value) << ','
        << bfp::format_double(r.p_values.at(d.statistic)) << ',' << bfp::format_double(d.alpha)
        << ',' << (d.reject ? 1 : 0) << ',' << (d.certificate_limited ? 1 : 0) << '\n';
  }
  return out.str();
}

bfp::SampleSummary load_samples(const std::string& x_path, const std::string& y_path) {
  const bfp::Matrix x = bfp::ingest_csv(x_path);
  const bfp::Matrix y = bfp::ingest_csv(y_path);
  return bfp::summarize(x, y);
}

void print_study_summary(const bfp::StudyResult& result) {
  std::printf("study=%s d=%d n1=%d n2=%d reps=%ld seed=%llu excluded=%ld wall=%.3fs\n",
              result.study.c_str(), result.config.d, result.config.n1,
              result.config.resolved_n2(), result.reps_run,
              static_cast<unsigned long long>(result.config.seed), result.excluded,
              result.wall_seconds);
  if (!result.rates.empty()) {
    std::printf("%-6s %8s %8s %10s %10s %8s\n", "test", "alpha", "delta", "rate", "stderr",
                "reps");
    for (const auto& e : result.rates)
      std::printf("%-6s %8.4g %8.4g %10.5f %10.5f %8ld\n", e.test.c_str(), e.alpha, e.delta,
                  e.rate, e.std_error, e.reps);
  }
  if (!result.timings.empty()) {
    std::printf("%-6s %14s %16s\n", "algo", "mean_seconds", "mean_iterations");
    for (const auto& e : result.timings)
      std::printf("%-6s %14.6f %16.1f\n", e.algorithm.c_str(), e.mean_seconds,
                  e.mean_iterations);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global-certificate solver and size/power studies for the two-sample "
               "Gaussian mean test with unequal covariances"};
  app.require_subcommand(1);

  // --- test ---------------------------------------------------------------
  auto* cmd_test = app.add_subcommand("test", "Run the W/LR0/LR/LM/B tests on two CSV samples");
  std::string test_x, test_y, test_out, test_format = "json";
  double test_epsilon = 1e-8;
  std::vector<double> test_alphas;
  cmd_test->add_option("x", test_x, "CSV with the X sample, one observation per row")
      ->required();
  cmd_test->add_option("y", test_y, "CSV with the Y sample")->required();
  cmd_test->add_option("--epsilon", test_epsilon, "certificate tolerance on the solver gap");
  cmd_test->add_option("--alpha", test_alphas, "test level, repeatable (default 0.01 0.05 0.10)");
  cmd_test->add_option("--out", test_out, "output file (default: stdout)");
  cmd_test->add_option("--format", test_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // --- solve --------------------------------------------------------------
  auto* cmd_solve = app.add_subcommand("solve", "Maximize the two-sample likelihood globally");
  std::string solve_x, solve_y, solve_out, solve_algorithm = "cla";
  double solve_epsilon = 1e-8;
  bool solve_trace = false, solve_relative = false;
  cmd_solve->add_option("x", solve_x, "CSV with the X sample")->required();
  cmd_solve->add_option("y", solve_y, "CSV with the Y sample")->required();
  cmd_solve->add_option("--epsilon", solve_epsilon, "certificate tolerance");
  cmd_solve->add_option("--algorithm", solve_algorithm, "cla or da")
      ->check(CLI::IsMember({"cla", "da"}));
  cmd_solve->add_flag("--trace", solve_trace, "include the per-iteration trace");
  cmd_solve->add_flag("--relative-gap", solve_relative,
                      "stop on gap <= epsilon*(1+|f*|) instead of gap <= epsilon");
  cmd_solve->add_option("--out", solve_out, "output file (default: stdout)");

  // --- simulate -----------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "Seeded Monte Carlo studies");
  cmd_sim->require_subcommand(1);
  bfp::StudyConfig config;
  std::string sim_out, sim_algorithm = "cla";
  std::vector<double> sim_alphas, sim_deltas;
  bool full_scale = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--d", config.d, "dimension");
    sub->add_option("--n1", config.n1, "X sample size");
    sub->add_option("--n2", config.n2, "Y sample size (default 2*n1)");
    sub->add_option("--reps", config.reps, "replications");
    sub->add_option("--alpha", sim_alphas, "test level, repeatable");
    sub->add_option("--eps,--epsilon", config.epsilon, "solver tolerance");
    sub->add_option("--seed", config.seed, "RNG seed; replication r uses stream r");
    sub->add_option("--threads", config.threads, "worker threads (output is thread-invariant)");
    sub->add_option("--algorithm", sim_algorithm, "cla or da")
        ->check(CLI::IsMember({"cla", "da"}));
    sub->add_flag("--relative-gap", config.relative_gap, "relative certificate tolerance");
    sub->add_flag("--full-scale", full_scale, "allow the large paper-scale configurations");
    sub->add_option("--out", sim_out, "output base path (writes <out>.json and <out>.csv)");
  };
  auto* sim_size = cmd_sim->add_subcommand("size", "null rejection rates");
  add_common(sim_size);
  auto* sim_power = cmd_sim->add_subcommand("power", "rejection rates along a delta grid");
  add_common(sim_power);
  sim_power->add_option("--deltas", sim_deltas, "comma list of standardized mean distances")
      ->delimiter(',');
  auto* sim_disc = cmd_sim->add_subcommand("discrepancy",
                                           "rates of decisions differing from the LR test");
  add_common(sim_disc);
  sim_disc->add_option("--successes", config.stop_successes,
                       "stop after this many LR0-vs-LR events (0 = fixed reps)");
  sim_disc->add_flag("--heuristics", config.heuristics, "include ItUp/NM/SA discrepancy rates");
  sim_disc->add_option("--sa-iters", config.sa_iters, "annealing iterations per replication");
  auto* sim_timing = cmd_sim->add_subcommand("timing", "wall-clock and iteration averages");
  add_common(sim_timing);
  sim_timing->add_option("--sa-iters", config.sa_iters, "annealing iterations per replication");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (*cmd_test) {
      if (test_alphas.empty()) test_alphas = {0.01, 0.05, 0.10};
      bfp::RunManifest manifest;
      manifest.subcommand = "test";
      manifest.started_at = bfp::iso_timestamp();
      manifest.input_digests = {{test_x, bfp::file_digest(test_x)},
                                {test_y, bfp::file_digest(test_y)}};
      manifest.config = {{"epsilon", test_epsilon}, {"alphas", test_alphas}};

      const bfp::SampleSummary summary = load_samples(test_x, test_y);
      const bfp::TestReport report = bfp::run_tests(summary, test_epsilon, test_alphas);
      manifest.finished_at = bfp::iso_timestamp();

      if (test_format == "csv") {
        emit(test_out, test_report_csv(report));
      } else {
        nlohmann::json j = bfp::to_json(report);
        j["manifest"] = bfp::to_json(manifest);
        emit(test_out, j.dump(2));
      }
      return kExitOk;
    }

    if (*cmd_solve) {
      bfp::RunManifest manifest;
      manifest.subcommand = "solve";
      manifest.started_at = bfp::iso_timestamp();
      manifest.input_digests = {{solve_x, bfp::file_digest(solve_x)},
                                {solve_y, bfp::file_digest(solve_y)}};
      manifest.config = {{"epsilon", solve_epsilon},
                         {"algorithm", solve_algorithm},
                         {"relative_gap", solve_relative},
                         {"trace", solve_trace}};

      const bfp::SampleSummary summary = load_samples(solve_x, solve_y);
      bfp::SolverOptions options;
      options.relative_gap = solve_relative;
      const bfp::BfpSolution sol = solve_algorithm == "da"
                                       ? bfp::run_da(summary, solve_epsilon, options)
                                       : bfp::run_cla(summary, solve_epsilon, options);
      manifest.finished_at = bfp::iso_timestamp();

      nlohmann::json j = bfp::to_json(sol, solve_trace);
      j["schema_version"] = bfp::kSchemaVersion;
      j["kind"] = "solve_report";
      j["algorithm"] = solve_algorithm;
      j["epsilon"] = solve_epsilon;
      j["manifest"] = bfp::to_json(manifest);
      emit(solve_out, j.dump(2));
      return kExitOk;
    }

    // simulate
    if (!sim_alphas.empty()) config.alphas = sim_alphas;
    config.delta_grid = sim_deltas;
    config.algorithm = sim_algorithm == "da" ? bfp::Algorithm::Da : bfp::Algorithm::Cla;
    if (!full_scale && (config.d > 120 || config.reps > 200000))
      throw bfp::ConfigError(
          "simulate: d > 120 or reps > 200000 requires --full-scale (long runtimes)");

    std::string study;
    bfp::RunManifest manifest;
    manifest.seed = config.seed;
    manifest.started_at = bfp::iso_timestamp();

    std::fprintf(stderr, "seed: %llu (stream-per-replication; identical flags reproduce "
                         "identical outputs)\n",
                 static_cast<unsigned long long>(config.seed));

    bfp::StudyResult result;
    if (*sim_size) {
      study = "size";
      result = bfp::size_study(config);
    } else if (*sim_power) {
      study = "power";
      result = bfp::power_study(config);
    } else if (*sim_disc) {
      study = "discrepancy";
      result = bfp::discrepancy_study(config);
    } else {
      study = "timing";
      result = bfp::timing_study(config);
    }
    manifest.subcommand = "simulate " + study;
    manifest.config = bfp::to_json(config);
    manifest.finished_at = bfp::iso_timestamp();

    nlohmann::json j = bfp::to_json(result);
    j["manifest"] = bfp::to_json(manifest);
    const std::string base = sim_out.empty() ? ("bfp_" + study) : sim_out;
    bfp::write_text_file(base + ".json", j.dump(2));
    bfp::write_text_file(base + ".csv", study == "timing" ? bfp::study_timings_csv(result)
                                                          : bfp::study_rates_csv(result));
    print_study_summary(result);
    std::printf("wrote %s.json and %s.csv\n", base.c_str(), base.c_str());
    return kExitOk;
  } catch (const bfp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitBadConfig;
  } catch (const bfp::DegenerateSample& e) {
    std::fprintf(stderr, "degenerate input: %s\n", e.what());
    return kExitBadInput;
  } catch (const bfp::NotPositiveDefinite& e) {
    std::fprintf(stderr, "degenerate input: %s\n", e.what());
    return kExitBadInput;
  } catch (const bfp::ConvergenceFailure& e) {
    std::fprintf(stderr, "degenerate input: %s\n", e.what());
    return kExitBadInput;
  } catch (const bfp::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitBadInput;
  } catch (const bfp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
