#pragma once

// Chi-square distribution functions, a counter-based splittable RNG, Gaussian
// sampling and random SPD covariance generation for the simulation harness.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "bfp/errors.hpp"
#include "bfp/matrixkit.hpp"

namespace bfp {

namespace detail {

// SplitMix64 finalizer; a strong 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based stream generator: a Weyl sequence with a per-stream odd
/// increment pushed through a 64-bit finalizer. Identical (seed, stream_id)
/// reproduce identical draws; distinct stream ids give independent streams,
/// so replication r of a study can own stream r regardless of thread count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        state_(detail::mix64(seed + 0x9E3779B97F4A7C15ull) ^
               detail::mix64(stream_id * 0xA24BAED4963EE407ull + 0x9FB21C651E98DF25ull)),
        gamma_(detail::mix64(stream_id ^ 0xD2B74407B1CE6E93ull) | 1ull) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return detail::mix64(state_);
  }

  /// Uniform on (0, 1), 53-bit resolution, never exactly 0.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal deviate via the polar (Marsaglia) method. The spare
  /// deviate of each accepted pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t gamma_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {

// Regularized lower incomplete gamma P(a, x): series for x < a+1, Lentz
// continued fraction for the complement otherwise.
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16)
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

// Acklam's rational approximation to the standard normal quantile,
// used only to seed Newton iterations.
inline double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

inline double chi2_cdf(int d, double x) {
  if (d < 1) throw ConfigError("chi2_cdf: d must be positive");
  if (x <= 0.0) return 0.0;
  return detail::gamma_p(0.5 * d, 0.5 * x);
}

inline double chi2_pdf(int d, double x) {
  if (x < 0.0) return 0.0;
  const double a = 0.5 * d;
  if (x == 0.0) return d == 2 ? 0.5 : (d < 2 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - std::lgamma(a) - a * std::log(2.0));
}

/// Inverse chi-square CDF by safeguarded Newton from a Wilson–Hilferty
/// starting point.
inline double chi2_quantile(int d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("chi2_quantile: p must lie in (0,1)");
  if (d < 1) throw ConfigError("chi2_quantile: d must be positive");
  const double z = detail::normal_quantile(p);
  const double f = 2.0 / (9.0 * d);
  double x = d * std::pow(std::max(1.0 - f + z * std::sqrt(f), 1e-8), 3);
  if (!(x > 0.0) || !std::isfinite(x)) x = static_cast<double>(d);

  double lo = 0.0;
  double hi = std::max(2.0 * x, 1.0);
  while (chi2_cdf(d, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  x = std::min(std::max(x, lo + 1e-12), hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = chi2_cdf(d, x) - p;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    if (std::abs(fx) <= 1e-15 * std::max(p, 1.0 - p)) break;
    const double dens = chi2_pdf(d, x);
    double step = dens > 0.0 ? fx / dens : 0.0;
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

/// mean + L·z with z i.i.d. standard normal, L the Cholesky factor of the
/// covariance.
inline Vector sample_mvn(RngStream& rng, const Vector& mean, const CholeskyFactor& chol) {
  const int d = chol.dim();
  if (static_cast<int>(mean.size()) != d)
    throw DimensionMismatch("sample_mvn: mean length mismatch");
  Vector z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  Vector x(mean);
  const Matrix& l = chol.lower();
  for (int i = 0; i < d; ++i) {
    const double* li = l.row(i);
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += li[j] * z[j];
    x[i] += s;
  }
  return x;
}

/// Σ = M·Mᵀ with M a d×d standard-normal matrix. Singular draws have
/// probability zero; factorization is retried at most 3 times regardless.
inline SpdMatrix random_spd(RngStream& rng, int d) {
  if (d < 1) throw ConfigError("random_spd: d must be positive");
  for (int attempt = 0; attempt < 3; ++attempt) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    Matrix s(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double v = 0.0;
        for (int k = 0; k < d; ++k) v += m(i, k) * m(j, k);
        s(i, j) = v;
        s(j, i) = v;
      }
    try {
      SpdMatrix spd{std::move(s)};
      cholesky_spd(spd);
      return spd;
    } catch (const NotPositiveDefinite&) {
      continue;
    }
  }
  throw ConvergenceFailure("random_spd: three singular draws in a row");
}

}  // namespace bfp
