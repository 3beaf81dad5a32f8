// Acceptance suite: end-to-end checks of the solver certificates, the
// statistic inequalities, the reference-table reproductions and the output
// determinism contract. One PASS/FAIL line per criterion; the process exits
// with the number of failed criteria.
//
// Usage: acceptance <path-to-cli-binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfp/bfp.hpp"

using namespace bfp;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %s (%.1fs) %s\n", pass ? "PASS" : "FAIL", name, seconds, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

SampleSummary draw_instance(RngStream& rng, int d, int n1, int n2, double delta) {
  const SpdMatrix sigma1 = random_spd(rng, d);
  const SpdMatrix sigma2 = random_spd(rng, d);
  const int axis = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
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

// allocation-free reduced objective for the dense probe loops
struct ObjectiveEvaluator {
  const SampleSummary& s;
  explicit ObjectiveEvaluator(const SampleSummary& summary) : s(summary) {}

  double operator()(const Vector& mu) const {
    const int d = s.d();
    double qx = 0.0, qy = 0.0;
    for (int i = 0; i < d; ++i) {
      double rxi = 0.0, ryi = 0.0;
      for (int j = 0; j < d; ++j) {
        rxi += s.s1_inv()(i, j) * (s.xbar()[j] - mu[j]);
        ryi += s.s2_inv()(i, j) * (s.ybar()[j] - mu[j]);
      }
      qx += (s.xbar()[i] - mu[i]) * rxi;
      qy += (s.ybar()[i] - mu[i]) * ryi;
    }
    return 0.5 * s.n1() * std::log1p(qx) + 0.5 * s.n2() * std::log1p(qy);
  }
};

double theorem_bound(const SampleSummary& s, double epsilon) {
  const Bounds b = compute_bounds(s);
  return std::ceil(b.u1_bar * b.u2_bar * static_cast<double>(s.n1()) * s.n2() /
                   (2.0 * epsilon * epsilon));
}

// --------------------------------------------------------------------------

void criterion1_global_optimality() {
  Timer timer;
  const double eps = 1e-8;
  int bad = 0;
  std::string detail;
  RngStream rng(9001, 0);
  for (int inst = 0; inst < 200; ++inst) {
    const int d = 1 + inst % 3;
    const int n1 = (inst / 3) % 2 == 0 ? 10 : 20;
    const SampleSummary s = draw_instance(rng, d, n1, 2 * n1, 1.2 * rng.uniform01());
    const BfpSolution sol = run_cla(s, eps);
    const ObjectiveEvaluator phi(s);

    double probe_min = std::min({phi(s.xbar()), phi(s.ybar()), phi(wald_mean_mu0(s))});
    if (d == 1) {
      const double lo = std::min(s.xbar()[0], s.ybar()[0]);
      const double hi = std::max(s.xbar()[0], s.ybar()[0]);
      Vector mu(1);
      for (int i = 0; i <= 100000; ++i) {
        mu[0] = lo + (hi - lo) * i / 100000.0;
        probe_min = std::min(probe_min, phi(mu));
      }
    } else {
      Vector mu(d);
      const Vector& a = s.xbar();
      const Vector& b = s.ybar();
      double span = 0.0;
      for (int j = 0; j < d; ++j) span = std::max(span, std::abs(b[j] - a[j]));
      for (int i = 0; i < 100000; ++i) {
        const double t = -0.2 + 1.4 * rng.uniform01();
        for (int j = 0; j < d; ++j)
          mu[j] = a[j] + t * (b[j] - a[j]) + 0.3 * (span + 0.1) * rng.normal();
        probe_min = std::min(probe_min, phi(mu));
      }
    }

    const bool ok = sol.f_star <= probe_min + 1e-6 && sol.gap <= eps &&
                    static_cast<double>(sol.iterations) <= theorem_bound(s, eps);
    if (!ok && ++bad == 1) {
      std::ostringstream os;
      os << "first failure at instance " << inst << ": f*=" << sol.f_star
         << " probe_min=" << probe_min << " gap=" << sol.gap;
      detail = os.str();
    }
  }
  const double secs = timer.seconds();
  const bool in_time = secs < 60.0;
  if (!in_time) detail += " runtime over 60s";
  report("C1 global-optimality oracle (200 instances, d<=3, eps=1e-8)", bad == 0 && in_time,
         bad ? detail : "grid/probe minimum never beats the certificate", secs);
}

void criterion2_ordering() {
  Timer timer;
  const double eps = 1e-6;
  const double tol = 2.0 * eps + 1e-9;
  int violations = 0;
  std::string detail = "W >= LR0 >= LR >= LM - tol on every instance";
  RngStream rng(9002, 0);
  for (int inst = 0; inst < 5000; ++inst) {
    const int d = 1 + inst % 50;
    const int n1 = 5 * d + 3;
    const SampleSummary s = draw_instance(rng, d, n1, 2 * n1, rng.uniform01());
    const BfpSolution sol = run_cla(s, eps);
    const double w = wald_statistic(s);
    const double lr0 = lr0_statistic(s);
    const double lr = lr_statistic(s, sol);
    const double lm = lm_statistic(s, sol.mu_hat);
    const bool ok = w >= lr0 - tol && lr0 >= lr - tol && lr >= lm - tol &&
                    static_cast<double>(sol.iterations) <= theorem_bound(s, eps);
    if (!ok && ++violations == 1) {
      std::ostringstream os;
      os << "instance " << inst << " d=" << d << ": W=" << w << " LR0=" << lr0 << " LR=" << lr
         << " LM=" << lm;
      detail = os.str();
    }
  }
  report("C2 statistic ordering (5000 instances, d in 1..50)", violations == 0, detail,
         timer.seconds());
}

void criterion3_size_tables() {
  Timer timer;
  struct Cell {
    int d, n1, n2;
    std::uint64_t seed;
    // rows: alpha 0.10, 0.05, 0.01; cols: W, LR, LM, B
    double expected[3][4];
  };
  const std::vector<Cell> cells{
      {2, 10, 20, 1003,
       {{0.160, 0.133, 0.102, 0.092}, {0.106, 0.077, 0.046, 0.046}, {0.039, 0.020, 0.005, 0.009}}},
      {5, 25, 50, 1005,
       {{0.171, 0.133, 0.098, 0.090}, {0.101, 0.073, 0.047, 0.046}, {0.035, 0.019, 0.005, 0.008}}}};
  const double alphas[3] = {0.10, 0.05, 0.01};
  const char* tests[4] = {"W", "LR", "LM", "B"};

  int bad = 0;
  std::ostringstream detail;
  for (const Cell& cell : cells) {
    StudyConfig config;
    config.d = cell.d;
    config.n1 = cell.n1;
    config.n2 = cell.n2;
    config.reps = 10000;
    config.alphas = {0.10, 0.05, 0.01};
    config.epsilon = 1e-6;
    config.seed = cell.seed;
    config.threads = 4;
    const StudyResult result = size_study(config);
    for (int ai = 0; ai < 3; ++ai) {
      for (int ti = 0; ti < 4; ++ti) {
        double rate = -1.0;
        for (const auto& e : result.rates)
          if (e.test == tests[ti] && e.alpha == alphas[ai]) rate = e.rate;
        if (std::abs(rate - cell.expected[ai][ti]) > 0.015) {
          ++bad;
          detail << " [d=" << cell.d << " " << tests[ti] << "@" << alphas[ai] << ": got " << rate
                 << " want " << cell.expected[ai][ti] << "+-0.015]";
        }
      }
    }
  }
  const double secs = timer.seconds();
  const bool in_time = secs < 600.0;
  std::string msg = bad ? detail.str() + " -- the Bartlett trace correction as specified is too "
                          "weak to land these B entries; W/LR/LM are in band (see README, "
                          "known red entry)"
                        : "all 24 entries inside +-0.015";
  report("C3 size-table reproduction (2 cells x 10000 reps)", bad == 0 && in_time, msg, secs);
}

void criterion4_da_exactness() {
  Timer timer;
  const double eps = 1e-3;
  int bad = 0;
  std::string detail = "loop counts exact, |f_DA - f_CLA| <= 2 eps";
  RngStream rng(9004, 0);
  for (int inst = 0; inst < 50; ++inst) {
    const int d = 2 + inst % 9;
    const int n1 = 5 * d;
    const SampleSummary s = draw_instance(rng, d, n1, 2 * n1, 0.5 * rng.uniform01());
    const BfpSolution da = run_da(s, eps);
    const BfpSolution cla = run_cla(s, eps);
    const Bounds b = compute_bounds(s);
    const long expected = static_cast<long>(
        std::ceil(std::log(b.u1_bar / b.l1) / std::log(1.0 + 2.0 * eps / s.n1())));
    const bool ok = da.iterations == expected && std::abs(da.f_star - cla.f_star) <= 2.0 * eps;
    if (!ok && ++bad == 1) {
      std::ostringstream os;
      os << "instance " << inst << ": loops=" << da.iterations << " expected=" << expected
         << " |df|=" << std::abs(da.f_star - cla.f_star);
      detail = os.str();
    }
  }
  report("C4 discretization exactness (50 instances)", bad == 0, detail, timer.seconds());
}

void criterion5_iteration_counts() {
  Timer timer;
  // the worst-case bound is asserted inside C1/C2 as well; here the
  // reference regime: relative eps = 1e-3, d = 20..100, N1 = 5d, N2 = 10d
  SolverOptions options;
  options.relative_gap = true;
  options.keep_trace = false;
  RngStream rng(9005, 0);
  long total_iters = 0;
  int count = 0;
  bool bound_ok = true;
  for (int d : {20, 40, 60, 80, 100}) {
    for (int rep = 0; rep < 6; ++rep) {
      const SampleSummary s = draw_instance(rng, d, 5 * d, 10 * d, 0.0);
      const BfpSolution sol = run_cla(s, 1e-3, options);
      total_iters += sol.iterations;
      ++count;
      bound_ok = bound_ok && static_cast<double>(sol.iterations) <= theorem_bound(s, 1e-3);
    }
  }
  const double avg = static_cast<double>(total_iters) / count;
  std::ostringstream detail;
  detail << "average iterations " << avg << " over " << count << " instances";
  report("C5 iteration counts in the reference regime (avg in [10,60])",
         bound_ok && avg >= 10.0 && avg <= 60.0, detail.str(), timer.seconds());
}

void criterion6_emep() {
  Timer timer;
  int bad = 0;
  std::string detail = "residuals, bisection agreement and subgradient inequality hold";
  RngStream rng(9006, 0);

  // 500 (instance, level) pairs
  for (int pair = 0; pair < 500; ++pair) {
    const int d = 1 + pair % 8;
    const int n1 = 5 * d + 4;
    const SampleSummary s = draw_instance(rng, d, n1, 2 * n1, 0.3 + rng.uniform01());
    const EmepContext ctx = prepare_context(s, Orientation::ConstraintOnX);
    const double level_cap = mahalanobis(s, Side::X, s.ybar());
    const double v1 = (0.02 + 0.96 * rng.uniform01()) * level_cap;
    if (!(v1 > 0.0)) continue;
    const EmepSolution sol = solve_emep(ctx, v1);
    if (!sol.active) continue;

    bool ok = std::abs(secular_value_and_derivative(ctx, sol.lambda_star, v1).first) <=
              1e-10 * (1.0 + v1);

    Vector ry = mat_vec(s.s2_inv().matrix(), s.ybar() - sol.mu_hat);
    Vector rx = mat_vec(s.s1_inv().matrix(), s.xbar() - sol.mu_hat);
    double kkt = 0.0;
    for (int i = 0; i < d; ++i) kkt = std::max(kkt, std::abs(ry[i] + sol.lambda_star * rx[i]));
    ok = ok && kkt <= 1e-7 * (1.0 + norm_inf(s.ybar() - s.xbar()));

    double lo = 0.0, hi = ctx.s_norm() / std::sqrt(v1);
    while (hi - lo > 0.25 * ctx.delta()) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (secular_value_and_derivative(ctx, mid, v1).first > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    ok = ok && std::abs(sol.lambda_star - 0.5 * (lo + hi)) <= ctx.delta();

    if (!ok && ++bad == 1) {
      std::ostringstream os;
      os << "pair " << pair << " d=" << d << " v1=" << v1 << " lambda=" << sol.lambda_star
         << " kkt=" << kkt;
      detail = os.str();
    }
  }

  // subgradient inequality of the optimal value across a level grid
  for (int inst = 0; inst < 20 && bad == 0; ++inst) {
    const int d = 1 + inst % 4;
    const SampleSummary s = draw_instance(rng, d, 6 * d + 3, 12 * d + 6, 0.5 + rng.uniform01());
    const EmepContext ctx = prepare_context(s, Orientation::ConstraintOnX);
    const double cap = mahalanobis(s, Side::X, s.ybar());
    const double v1 = 0.4 * cap;
    const EmepSolution at = solve_emep(ctx, v1);
    for (int g = 0; g < 50; ++g) {
      const double v = cap * (g + 0.5) / 50.0;
      const EmepSolution other = solve_emep(ctx, v);
      if (other.h_value < at.h_value + at.subgradient * (v - v1) - 1e-8) {
        ++bad;
        std::ostringstream os;
        os << "subgradient inequality violated at instance " << inst << " grid " << g;
        detail = os.str();
        break;
      }
    }
  }
  report("C6 EMEP correctness (500 pairs + subgradient grids)", bad == 0, detail,
         timer.seconds());
}

void criterion7_lm_oracle() {
  Timer timer;
  int bad = 0;
  std::string detail = "closed form tracks the score outer-product construction";
  RngStream rng(9007, 0);
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 1 + inst % 5;
    const int n1 = 10 * d + 5;
    const int n2 = 14 * d + 7;
    const SpdMatrix sigma1 = random_spd(rng, d);
    const SpdMatrix sigma2 = random_spd(rng, d);
    const CholeskyFactor l1 = cholesky_spd(sigma1);
    const CholeskyFactor l2 = cholesky_spd(sigma2);
    const Vector zero(d, 0.0);
    const Vector shift(d, 0.3 * rng.normal());
    Matrix x(n1, d), y(n2, d);
    for (int i = 0; i < n1; ++i) {
      const Vector row = sample_mvn(rng, zero, l1);
      for (int j = 0; j < d; ++j) x(i, j) = row[j];
    }
    for (int i = 0; i < n2; ++i) {
      const Vector row = sample_mvn(rng, shift, l2);
      for (int j = 0; j < d; ++j) y(i, j) = row[j];
    }
    const SampleSummary s = summarize(x, y);
    const BfpSolution sol = run_cla(s, 1e-10);
    const double closed = lm_statistic(s, sol.mu_hat);

    // Per-observation mean scores at the restricted estimate, assembled into
    // e'G (G'G)^-1 G'e. The scores are expressed in a whitened basis
    // (score rows right-multiplied by the covariance's Cholesky factor);
    // the projection of e onto the score column space is invariant under
    // any invertible right factor, and the whitened normal equations stay
    // well conditioned for ill-conditioned covariance draws.
    auto cov_at = [&](const Matrix& sample, const Vector& mu) {
      Matrix cov(d, d);
      for (int i = 0; i < sample.rows(); ++i) {
        const Vector r = sample.row_vector(i) - mu;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) cov(a, b) += r[a] * r[b];
      }
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) cov(a, b) /= sample.rows();
      return SpdMatrix(std::move(cov));
    };
    auto block = [&](const Matrix& sample) {
      const CholeskyFactor f = cholesky_spd(cov_at(sample, sol.mu_hat));
      Vector ze(d, 0.0);
      Matrix ztz(d, d);
      for (int i = 0; i < sample.rows(); ++i) {
        const Vector zi = f.solve_lower(sample.row_vector(i) - sol.mu_hat);
        for (int a = 0; a < d; ++a) {
          ze[a] += zi[a];
          for (int b = a; b < d; ++b) ztz(a, b) += zi[a] * zi[b];
        }
      }
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < a; ++b) ztz(a, b) = ztz(b, a);
      return dot(ze, cholesky_spd(SpdMatrix(std::move(ztz))).solve(ze));
    };
    const double outer = block(x) + block(y);

    if (std::abs(outer - closed) > 1e-6 * (std::abs(closed) + 1e-12) && ++bad == 1) {
      std::ostringstream os;
      os << "instance " << inst << ": closed=" << closed << " outer=" << outer;
      detail = os.str();
    }
  }
  report("C7 LM oracle equivalence (100 instances, d in 1..5)", bad == 0, detail,
         timer.seconds());
}

void criterion8_discrepancy() {
  Timer timer;
  std::ostringstream detail;
  bool ok = true;

  for (int d : {2, 10}) {
    StudyConfig config;
    config.d = d;
    config.n1 = 5 * d;
    config.n2 = 10 * d;
    config.reps = 50000;
    config.epsilon = 1e-6;
    config.seed = 8000 + static_cast<std::uint64_t>(d);
    config.threads = 4;
    const StudyResult r = discrepancy_study(config);
    double lr0 = -1.0, w = -1.0;
    for (const auto& e : r.rates) {
      if (e.test == "LR0") lr0 = e.rate;
      if (e.test == "W") w = e.rate;
    }
    detail << " d=" << d << ": LR0 " << lr0 << ", W " << w << ";";
    ok = ok && lr0 <= 0.01 && w >= lr0;
  }

  StudyConfig hconfig;
  hconfig.d = 10;
  hconfig.n1 = 50;
  hconfig.n2 = 100;
  hconfig.reps = 5000;
  hconfig.epsilon = 1e-6;
  hconfig.seed = 8800;
  hconfig.threads = 4;
  hconfig.heuristics = true;
  const StudyResult hr = discrepancy_study(hconfig);
  double itup = -1.0, nm = -1.0;
  for (const auto& e : hr.rates) {
    if (e.test == "ItUp") itup = e.rate;
    if (e.test == "NM") nm = e.rate;
  }
  detail << " heuristics d=10: ItUp " << itup << ", NM " << nm;
  ok = ok && itup == 0.0 && nm == 0.0;

  report("C8 discrepancy rates (5e4 reps at d=2,10; heuristics at d=10)", ok, detail.str(),
         timer.seconds());
}

void criterion9_invariance() {
  Timer timer;
  int bad = 0;
  std::string detail = "mahalanobis, solver and statistics equivariant on 100 transforms";
  RngStream rng(9009, 0);
  const double eps = 1e-8;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 4;
    const int n1 = 6 * d + 4;
    const int n2 = 9 * d + 5;
    const SpdMatrix sigma1 = random_spd(rng, d);
    const SpdMatrix sigma2 = random_spd(rng, d);
    const CholeskyFactor l1 = cholesky_spd(sigma1);
    const CholeskyFactor l2 = cholesky_spd(sigma2);
    const Vector zero(d, 0.0);
    const Vector offset(d, 0.4);
    Matrix x(n1, d), y(n2, d);
    for (int i = 0; i < n1; ++i) {
      const Vector row = sample_mvn(rng, zero, l1);
      for (int j = 0; j < d; ++j) x(i, j) = row[j];
    }
    for (int i = 0; i < n2; ++i) {
      const Vector row = sample_mvn(rng, offset, l2);
      for (int j = 0; j < d; ++j) y(i, j) = row[j];
    }

    const Matrix q = spd_sqrt(random_spd(rng, d));
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = q(i, j) + (i == j ? 0.5 : 0.0);
    Vector shift(d);
    for (auto& v : shift) v = rng.normal();
    auto transform = [&](const Matrix& sample) {
      Matrix out(sample.rows(), d);
      for (int i = 0; i < sample.rows(); ++i) {
        const Vector row = mat_vec(a, sample.row_vector(i)) + shift;
        for (int j = 0; j < d; ++j) out(i, j) = row[j];
      }
      return out;
    };

    const SampleSummary s = summarize(x, y);
    const SampleSummary st = summarize(transform(x), transform(y));

    Vector mu(d);
    for (auto& v : mu) v = rng.normal();
    const double m_base = mahalanobis(s, Side::X, mu);
    const double m_mapped = mahalanobis(st, Side::X, mat_vec(a, mu) + shift);
    bool ok = std::abs(m_mapped - m_base) <= 1e-8 * (1.0 + m_base);

    const BfpSolution base = run_cla(s, eps);
    const BfpSolution mapped = run_cla(st, eps);
    ok = ok && std::abs(mapped.f_star - base.f_star) <= 1e-7 * (1.0 + std::abs(base.f_star));
    ok = ok && std::abs(mapped.u1 - base.u1) <= 1e-7 * base.u1;
    ok = ok && std::abs(mapped.u2 - base.u2) <= 1e-7 * base.u2;
    const Vector expected_mu = mat_vec(a, base.mu_hat) + shift;
    for (int i = 0; i < d; ++i)
      ok = ok &&
           std::abs(mapped.mu_hat[i] - expected_mu[i]) <= 1e-6 * (1.0 + std::abs(expected_mu[i]));

    const double stats_base[5] = {wald_statistic(s), lr0_statistic(s), lr_statistic(s, base),
                                  lm_statistic(s, base.mu_hat),
                                  bartlett_statistic(s, lr_statistic(s, base)).first};
    const double stats_mapped[5] = {wald_statistic(st), lr0_statistic(st),
                                    lr_statistic(st, mapped), lm_statistic(st, mapped.mu_hat),
                                    bartlett_statistic(st, lr_statistic(st, mapped)).first};
    for (int i = 0; i < 5; ++i)
      ok = ok &&
           std::abs(stats_mapped[i] - stats_base[i]) <= 1e-6 * (1.0 + std::abs(stats_base[i]));

    if (!ok && ++bad == 1) {
      std::ostringstream os;
      os << "transform " << t << " (d=" << d << ") broke equivariance";
      detail = os.str();
    }
  }
  report("C9 invariance suite (100 random transforms)", bad == 0, detail, timer.seconds());
}

nlohmann::json scrubbed_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  j.erase("wall_seconds");
  if (j.contains("manifest")) {
    j["manifest"].erase("started_at");
    j["manifest"].erase("finished_at");
    if (j["manifest"].contains("config")) j["manifest"]["config"].erase("threads");
  }
  if (j.contains("config")) j["config"].erase("threads");
  if (j.contains("timings")) j.erase("timings");  // wall-clock payloads
  return j;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion10_determinism(const std::string& cli) {
  Timer timer;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("bfp_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  struct Run {
    std::string name;
    std::string args;
  };
  const std::vector<Run> runs{
      {"size", "simulate size --d 2 --n1 10 --reps 200 --seed 7"},
      {"power", "simulate power --d 2 --n1 10 --reps 100 --seed 7 --deltas 0,1"},
      {"discrepancy", "simulate discrepancy --d 2 --n1 10 --reps 300 --seed 7"},
      {"timing", "simulate timing --d 3 --n1 15 --reps 3 --seed 7 --eps 1e-3"},
  };

  bool ok = true;
  std::ostringstream detail;
  for (const Run& run : runs) {
    const fs::path out1 = dir / (run.name + "_t1");
    const fs::path out4 = dir / (run.name + "_t4");
    for (const auto& [threads, out] : {std::pair{1, out1}, std::pair{4, out4}}) {
      const std::string cmd = cli + " " + run.args + " --threads " + std::to_string(threads) +
                              " --out " + out.string() + " >/dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail << " [" << run.name << ": exit nonzero]";
      }
    }
    if (!ok) break;
    if (scrubbed_json(out1.string() + ".json") != scrubbed_json(out4.string() + ".json")) {
      ok = false;
      detail << " [" << run.name << ": JSON differs]";
    }
    if (run.name != "timing" && slurp(out1.string() + ".csv") != slurp(out4.string() + ".csv")) {
      ok = false;
      detail << " [" << run.name << ": CSV differs]";
    }
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  report("C10 CLI determinism across thread counts", ok,
         ok ? "JSON and CSV identical modulo timestamp fields" : detail.str(), timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli-binary>\n");
    return 64;
  }
  const std::string cli = argv[1];

  criterion1_global_optimality();
  criterion2_ordering();
  criterion3_size_tables();
  criterion4_da_exactness();
  criterion5_iteration_counts();
  criterion6_emep();
  criterion7_lm_oracle();
  criterion8_discrepancy();
  criterion9_invariance();
  criterion10_determinism(cli);

  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return g_failures;
}
