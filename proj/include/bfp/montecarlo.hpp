#pragma once

// Seeded simulation studies: size and power of the four tests against the
// chi-square reference, discrepancy rates of the cheap statistics against
// the certified likelihood ratio, and timing comparisons. Every replication
// owns RNG stream (seed, replication index), so results are bit-identical
// for any thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bfp/distributions.hpp"
#include "bfp/errors.hpp"
#include "bfp/heuristics.hpp"
#include "bfp/mltests.hpp"
#include "bfp/solvers.hpp"
#include "bfp/stats_core.hpp"

namespace bfp {

enum class Algorithm { Cla, Da };

struct StudyConfig {
  int d = 2;
  int n1 = 10;
  int n2 = 0;  // 0 → 2·n1
  long reps = 2000;
  std::vector<double> alphas{0.01, 0.05, 0.10};
  double epsilon = 1e-6;
  std::uint64_t seed = 42;
  std::vector<double> delta_grid;  // power study
  Algorithm algorithm = Algorithm::Cla;
  int threads = 1;
  bool relative_gap = false;
  long stop_successes = 0;          // discrepancy study: 0 = fixed replication count
  double discrepancy_alpha = 0.05;  // level at which discrepancy events are counted
  bool heuristics = false;          // run ItUp/NM/SA inside the discrepancy study
  int sa_iters = 1000;

  int resolved_n2() const { return n2 > 0 ? n2 : 2 * n1; }

  void validate() const {
    if (d < 1) throw ConfigError("config: d must be positive");
    if (n1 <= d) throw ConfigError("config: need n1 > d");
    if (resolved_n2() <= d) throw ConfigError("config: need n2 > d");
    if (reps < 1) throw ConfigError("config: reps must be at least 1");
    if (!(epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
    if (alphas.empty()) throw ConfigError("config: need at least one alpha");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("config: alpha must lie in (0,1)");
    if (threads < 1) throw ConfigError("config: threads must be at least 1");
    for (double dl : delta_grid)
      if (dl < 0.0) throw ConfigError("config: deltas must be nonnegative");
    if (stop_successes < 0) throw ConfigError("config: successes must be nonnegative");
  }
};

struct RateEntry {
  std::string test;
  double alpha = 0.0;
  double delta = 0.0;
  double rate = 0.0;
  double std_error = 0.0;
  long reps = 0;
};

struct QuartileEntry {
  std::string test;
  double delta = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
};

struct TimingEntry {
  std::string algorithm;
  double mean_seconds = 0.0;
  double mean_iterations = 0.0;
};

struct StudyResult {
  std::string study;
  StudyConfig config;
  std::vector<RateEntry> rates;
  std::vector<QuartileEntry> quartiles;
  std::vector<TimingEntry> timings;
  long excluded = 0;
  long reps_run = 0;
  double wall_seconds = 0.0;
};

/// Mean shift of the Y population on a canonical axis that realizes a
/// standardized squared distance Δ² in the (Σ₁+Σ₂)⁻¹ metric.
inline Vector mu2_of_delta(const SpdMatrix& sigma1, const SpdMatrix& sigma2, double delta,
                           int axis) {
  const int d = sigma1.dim();
  if (axis < 0 || axis >= d) throw ConfigError("mu2_of_delta: axis out of range");
  if (delta < 0.0) throw ConfigError("mu2_of_delta: delta must be nonnegative");
  Vector mu2(d, 0.0);
  if (delta == 0.0) return mu2;
  Matrix sum(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sum(i, j) = sigma1(i, j) + sigma2(i, j);
  Vector axis_vec(d, 0.0);
  axis_vec[axis] = 1.0;
  const double q = cholesky_spd(SpdMatrix(std::move(sum))).quad_form_inv(axis_vec);
  mu2[axis] = delta / std::sqrt(q);
  return mu2;
}

namespace detail {

template <class Fn>
void parallel_reps(long begin, long end, int threads, Fn&& fn) {
  if (threads <= 1 || end - begin <= 1) {
    for (long r = begin; r < end; ++r) fn(r);
    return;
  }
  std::atomic<long> next{begin};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long r = next.fetch_add(1);
      if (r >= end) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline double quantile_type7(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct RepStats {
  double w = 0.0, lr0 = 0.0, lr = 0.0, lm = 0.0, b = 0.0;
  bool ok = false;
};

// Covariances first, then the X block, then the Y block, so that the size
// study and the power study at Δ=0 consume the stream identically.
inline SampleSummary draw_instance(RngStream& rng, int d, int n1, int n2, double delta,
                                   int axis) {
  SpdMatrix sigma1 = random_spd(rng, d);
  SpdMatrix sigma2 = random_spd(rng, d);
  const Vector mu2 = mu2_of_delta(sigma1, sigma2, delta, axis);
  const CholeskyFactor l1 = cholesky_spd(sigma1);
  const CholeskyFactor l2 = cholesky_spd(sigma2);
  const Vector zero(d, 0.0);
  Matrix x(n1, d), y(n2, d);
  for (int i = 0; i < n1; ++i) {
    const Vector row = sample_mvn(rng, zero, l1);
    for (int j = 0; j < d; ++j) x(i, j) = row[j];
  }
  for (int i = 0; i < n2; ++i) {
    const Vector row = sample_mvn(rng, mu2, l2);
    for (int j = 0; j < d; ++j) y(i, j) = row[j];
  }
  return summarize(x, y);
}

inline RepStats compute_rep_stats(const SampleSummary& summary, const StudyConfig& config) {
  SolverOptions options;
  options.relative_gap = config.relative_gap;
  options.keep_trace = false;
  const BfpSolution sol = config.algorithm == Algorithm::Da
                              ? run_da(summary, config.epsilon, options)
                              : run_cla(summary, config.epsilon, options);
  RepStats s;
  s.w = wald_statistic(summary);
  s.lr0 = lr0_statistic(summary);
  s.lr = lr_statistic(summary, sol);
  s.lm = lm_statistic(summary, sol.mu_hat);
  s.b = bartlett_statistic(summary, s.lr).first;
  s.ok = true;
  return s;
}

inline void append_rates_and_quartiles(StudyResult& result, const std::vector<RepStats>& stats,
                                       const StudyConfig& config, double delta) {
  const std::vector<std::pair<std::string, double RepStats::*>> tests{
      {"W", &RepStats::w}, {"LR", &RepStats::lr}, {"LM", &RepStats::lm}, {"B", &RepStats::b}};
  long n_ok = 0;
  for (const auto& s : stats) n_ok += s.ok ? 1 : 0;
  for (const auto& [name, member] : tests) {
    std::vector<double> values;
    values.reserve(stats.size());
    for (const auto& s : stats)
      if (s.ok) values.push_back(s.*member);
    for (double alpha : config.alphas) {
      const double q = chi2_quantile(config.d, 1.0 - alpha);
      long rejections = 0;
      for (double v : values) rejections += v > q ? 1 : 0;
      RateEntry e;
      e.test = name;
      e.alpha = alpha;
      e.delta = delta;
      e.reps = n_ok;
      e.rate = n_ok > 0 ? static_cast<double>(rejections) / static_cast<double>(n_ok) : 0.0;
      e.std_error = n_ok > 0 ? std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(n_ok)) : 0.0;
      result.rates.push_back(e);
    }
    std::sort(values.begin(), values.end());
    QuartileEntry qe;
    qe.test = name;
    qe.delta = delta;
    qe.q25 = quantile_type7(values, 0.25);
    qe.q50 = quantile_type7(values, 0.50);
    qe.q75 = quantile_type7(values, 0.75);
    result.quartiles.push_back(qe);
  }
}

}  // namespace detail

/// Null-hypothesis rejection rates: fresh covariance pair per replication,
/// both samples drawn with mean zero.
inline StudyResult size_study(const StudyConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n2 = config.resolved_n2();
  std::vector<detail::RepStats> stats(static_cast<std::size_t>(config.reps));
  std::atomic<long> excluded{0};
  detail::parallel_reps(0, config.reps, config.threads, [&](long r) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(r));
    try {
      const SampleSummary summary =
          detail::draw_instance(rng, config.d, config.n1, n2, 0.0, 0);
      stats[static_cast<std::size_t>(r)] = detail::compute_rep_stats(summary, config);
    } catch (const Error&) {
      excluded.fetch_add(1);
    }
  });
  StudyResult result;
  result.study = "size";
  result.config = config;
  result.excluded = excluded.load();
  result.reps_run = config.reps;
  detail::append_rates_and_quartiles(result, stats, config, 0.0);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Same protocol with the Y mean moved to mu2_of_delta(Σ₁, Σ₂, Δ, axis),
/// the axis cycling with the replication index. Matched streams mean the
/// Δ=0 column reproduces the size study exactly.
inline StudyResult power_study(const StudyConfig& config) {
  config.validate();
  if (config.delta_grid.empty()) throw ConfigError("power_study: delta grid is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const int n2 = config.resolved_n2();
  StudyResult result;
  result.study = "power";
  result.config = config;
  result.reps_run = config.reps;
  long excluded_total = 0;
  for (double delta : config.delta_grid) {
    std::vector<detail::RepStats> stats(static_cast<std::size_t>(config.reps));
    std::atomic<long> excluded{0};
    detail::parallel_reps(0, config.reps, config.threads, [&](long r) {
      RngStream rng(config.seed, static_cast<std::uint64_t>(r));
      const int axis = static_cast<int>(r % config.d);
      try {
        const SampleSummary summary =
            detail::draw_instance(rng, config.d, config.n1, n2, delta, axis);
        stats[static_cast<std::size_t>(r)] = detail::compute_rep_stats(summary, config);
      } catch (const Error&) {
        excluded.fetch_add(1);
      }
    });
    excluded_total += excluded.load();
    detail::append_rates_and_quartiles(result, stats, config, delta);
  }
  result.excluded = excluded_total;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Rates at which the cheap statistics decide differently from the
/// certified likelihood ratio at the discrepancy level: a discrepancy is a
/// rejection by W, LR₀ or a heuristic LR while the certified LR accepts.
/// Supports run-until-k-successes stopping on the LR₀ event count.
inline StudyResult discrepancy_study(const StudyConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n2 = config.resolved_n2();
  const double q = chi2_quantile(config.d, 1.0 - config.discrepancy_alpha);

  struct RepFlags {
    bool ok = false;
    bool lr_rej = false;
    bool lr0_disc = false, w_disc = false;
    bool itup_disc = false, nm_disc = false, sa_disc = false;
  };
  std::vector<RepFlags> flags(static_cast<std::size_t>(config.reps));

  SolverOptions options;
  options.relative_gap = config.relative_gap;
  options.keep_trace = false;

  auto run_rep = [&](long r) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(r));
    RepFlags f;
    try {
      const SampleSummary summary = detail::draw_instance(rng, config.d, config.n1, n2, 0.0, 0);
      const BfpSolution sol = run_cla(summary, config.epsilon, options);
      const double lr = lr_statistic(summary, sol);
      const double lr0 = lr0_statistic(summary);
      const double w = wald_statistic(summary);
      f.lr_rej = lr > q;
      f.lr0_disc = lr0 > q && !f.lr_rej;
      f.w_disc = w > q && !f.lr_rej;
      if (config.heuristics) {
        const double lr_itup = 2.0 * iterative_update(summary).objective;
        const double lr_nm = 2.0 * newton_linesearch(summary).objective;
        const double lr_sa = 2.0 * simulated_annealing(summary, rng, config.sa_iters).objective;
        f.itup_disc = lr_itup > q && !f.lr_rej;
        f.nm_disc = lr_nm > q && !f.lr_rej;
        f.sa_disc = lr_sa > q && !f.lr_rej;
      }
      f.ok = true;
    } catch (const Error&) {
      f.ok = false;
    }
    flags[static_cast<std::size_t>(r)] = f;
  };

  long reps_run = config.reps;
  if (config.stop_successes > 0) {
    // chunked evaluation, scanned in replication order so the stopping
    // point is independent of the thread count
    const long chunk = std::max<long>(256, 64L * config.threads);
    long processed = 0;
    long successes = 0;
    bool stopped = false;
    while (processed < config.reps && !stopped) {
      const long end = std::min(config.reps, processed + chunk);
      detail::parallel_reps(processed, end, config.threads, run_rep);
      for (long r = processed; r < end; ++r) {
        if (flags[static_cast<std::size_t>(r)].lr0_disc) {
          ++successes;
          if (successes >= config.stop_successes) {
            reps_run = r + 1;
            stopped = true;
            break;
          }
        }
      }
      processed = end;
    }
    if (!stopped) reps_run = config.reps;
  } else {
    detail::parallel_reps(0, config.reps, config.threads, run_rep);
  }

  StudyResult result;
  result.study = "discrepancy";
  result.config = config;
  result.reps_run = reps_run;
  long n_ok = 0;
  long lr0_c = 0, w_c = 0, itup_c = 0, nm_c = 0, sa_c = 0;
  for (long r = 0; r < reps_run; ++r) {
    const auto& f = flags[static_cast<std::size_t>(r)];
    if (!f.ok) {
      ++result.excluded;
      continue;
    }
    ++n_ok;
    lr0_c += f.lr0_disc;
    w_c += f.w_disc;
    itup_c += f.itup_disc;
    nm_c += f.nm_disc;
    sa_c += f.sa_disc;
  }
  auto add = [&](const std::string& name, long count) {
    RateEntry e;
    e.test = name;
    e.alpha = config.discrepancy_alpha;
    e.delta = 0.0;
    e.reps = n_ok;
    e.rate = n_ok > 0 ? static_cast<double>(count) / static_cast<double>(n_ok) : 0.0;
    e.std_error = n_ok > 0 ? std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(n_ok)) : 0.0;
    result.rates.push_back(e);
  };
  add("LR0", lr0_c);
  add("W", w_c);
  if (config.heuristics) {
    add("ItUp", itup_c);
    add("NM", nm_c);
    add("SA", sa_c);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Wall-clock and iteration averages over identical instances: spectral
/// initialization, the certified solvers, and the three local methods.
inline StudyResult timing_study(const StudyConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n2 = config.resolved_n2();

  struct RepTiming {
    bool ok = false;
    double init_s = 0.0, cla_s = 0.0, da_s = 0.0, itup_s = 0.0, nm_s = 0.0, sa_s = 0.0;
    double cla_it = 0.0, da_it = 0.0, itup_it = 0.0, nm_it = 0.0, sa_it = 0.0;
  };
  std::vector<RepTiming> times(static_cast<std::size_t>(config.reps));

  SolverOptions options;
  options.relative_gap = config.relative_gap;
  options.keep_trace = false;

  detail::parallel_reps(0, config.reps, config.threads, [&](long r) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(r));
    RepTiming t;
    using clock = std::chrono::steady_clock;
    try {
      const SampleSummary summary = detail::draw_instance(rng, config.d, config.n1, n2, 0.0, 0);
      auto c0 = clock::now();
      const EmepContext ctx = prepare_context(summary, Orientation::ConstraintOnX);
      auto c1 = clock::now();
      const BfpSolution cla = run_cla(summary, ctx, config.epsilon, options);
      auto c2 = clock::now();
      const BfpSolution da = run_da(summary, ctx, config.epsilon, options);
      auto c3 = clock::now();
      const HeuristicResult itup = iterative_update(summary);
      auto c4 = clock::now();
      const HeuristicResult nm = newton_linesearch(summary);
      auto c5 = clock::now();
      const HeuristicResult sa = simulated_annealing(summary, rng, config.sa_iters);
      auto c6 = clock::now();
      t.init_s = std::chrono::duration<double>(c1 - c0).count();
      t.cla_s = std::chrono::duration<double>(c2 - c1).count();
      t.da_s = std::chrono::duration<double>(c3 - c2).count();
      t.itup_s = std::chrono::duration<double>(c4 - c3).count();
      t.nm_s = std::chrono::duration<double>(c5 - c4).count();
      t.sa_s = std::chrono::duration<double>(c6 - c5).count();
      t.cla_it = cla.iterations;
      t.da_it = da.iterations;
      t.itup_it = itup.iterations;
      t.nm_it = nm.iterations;
      t.sa_it = sa.iterations;
      t.ok = true;
    } catch (const Error&) {
      t.ok = false;
    }
    times[static_cast<std::size_t>(r)] = t;
  });

  StudyResult result;
  result.study = "timing";
  result.config = config;
  result.reps_run = config.reps;
  long n_ok = 0;
  RepTiming sum;
  for (const auto& t : times) {
    if (!t.ok) {
      ++result.excluded;
      continue;
    }
    ++n_ok;
    sum.init_s += t.init_s;
    sum.cla_s += t.cla_s;
    sum.da_s += t.da_s;
    sum.itup_s += t.itup_s;
    sum.nm_s += t.nm_s;
    sum.sa_s += t.sa_s;
    sum.cla_it += t.cla_it;
    sum.da_it += t.da_it;
    sum.itup_it += t.itup_it;
    sum.nm_it += t.nm_it;
    sum.sa_it += t.sa_it;
  }
  const double denom = n_ok > 0 ? static_cast<double>(n_ok) : 1.0;
  result.timings.push_back(TimingEntry{"init", sum.init_s / denom, 0.0});
  result.timings.push_back(TimingEntry{"cla", sum.cla_s / denom, sum.cla_it / denom});
  result.timings.push_back(TimingEntry{"da", sum.da_s / denom, sum.da_it / denom});
  result.timings.push_back(TimingEntry{"itup", sum.itup_s / denom, sum.itup_it / denom});
  result.timings.push_back(TimingEntry{"nm", sum.nm_s / denom, sum.nm_it / denom});
  result.timings.push_back(TimingEntry{"sa", sum.sa_s / denom, sum.sa_it / denom});
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace bfp
