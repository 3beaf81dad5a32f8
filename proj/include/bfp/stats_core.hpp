#pragma once

// Sufficient statistics of the two samples, squared Mahalanobis distance
// functions, and the variance-weighted mean estimate the Wald statistic
// minimizes.

#include <cmath>
#include <string>
#include <utility>

#include "bfp/errors.hpp"
#include "bfp/matrixkit.hpp"

namespace bfp {

enum class Side { X, Y };

/// Immutable summary of both samples: means, MLE-normalized covariances
/// (divisor N, not N−1) and their cached Cholesky factors and inverses.
/// All quadratic forms downstream go through the cached factors.
class SampleSummary {
 public:
  SampleSummary(int n1, int n2, Vector xbar, Vector ybar, SpdMatrix s1, SpdMatrix s2)
      : d_(static_cast<int>(xbar.size())),
        n1_(n1),
        n2_(n2),
        xbar_(std::move(xbar)),
        ybar_(std::move(ybar)),
        s1_(std::move(s1)),
        s2_(std::move(s2)) {
    if (static_cast<int>(ybar_.size()) != d_ || s1_.dim() != d_ || s2_.dim() != d_)
      throw DimensionMismatch("SampleSummary: inconsistent dimensions");
    if (n1_ <= d_ || n2_ <= d_)
      throw DegenerateSample("SampleSummary: need N1 > d and N2 > d, got N1=" +
                             std::to_string(n1_) + " N2=" + std::to_string(n2_) +
                             " d=" + std::to_string(d_));
    try {
      chol1_ = cholesky_spd(s1_);
      chol2_ = cholesky_spd(s2_);
    } catch (const NotPositiveDefinite& e) {
      throw DegenerateSample(std::string("SampleSummary: covariance not positive definite (") +
                             e.what() + ")");
    }
    inv1_ = invert_spd(s1_);
    inv2_ = invert_spd(s2_);
  }

  int d() const { return d_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  const Vector& xbar() const { return xbar_; }
  const Vector& ybar() const { return ybar_; }
  const SpdMatrix& s1() const { return s1_; }
  const SpdMatrix& s2() const { return s2_; }
  const CholeskyFactor& chol1() const { return chol1_; }
  const CholeskyFactor& chol2() const { return chol2_; }
  const SpdMatrix& s1_inv() const { return inv1_; }
  const SpdMatrix& s2_inv() const { return inv2_; }

  const Vector& mean(Side side) const { return side == Side::X ? xbar_ : ybar_; }
  const CholeskyFactor& chol(Side side) const { return side == Side::X ? chol1_ : chol2_; }
  const SpdMatrix& cov_inv(Side side) const { return side == Side::X ? inv1_ : inv2_; }
  int count(Side side) const { return side == Side::X ? n1_ : n2_; }

 private:
  int d_;
  int n1_, n2_;
  Vector xbar_, ybar_;
  SpdMatrix s1_, s2_;
  CholeskyFactor chol1_, chol2_;
  SpdMatrix inv1_, inv2_;
};

/// Column means and MLE covariances of raw observation matrices
/// (one observation per row).
inline SampleSummary summarize(const Matrix& x_sample, const Matrix& y_sample) {
  const int d = x_sample.cols();
  if (y_sample.cols() != d) throw DimensionMismatch("summarize: samples have different widths");
  const int n1 = x_sample.rows();
  const int n2 = y_sample.rows();
  if (n1 <= d || n2 <= d)
    throw DegenerateSample("summarize: need more observations than dimensions (N1=" +
                           std::to_string(n1) + ", N2=" + std::to_string(n2) +
                           ", d=" + std::to_string(d) + ")");

  auto moments = [d](const Matrix& sample) {
    const int n = sample.rows();
    Vector mean(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) mean[j] += sample(i, j);
    for (int j = 0; j < d; ++j) mean[j] /= n;
    Matrix cov(d, d);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) {
        const double ra = sample(i, a) - mean[a];
        for (int b = a; b < d; ++b) cov(a, b) += ra * (sample(i, b) - mean[b]);
      }
    }
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        cov(a, b) /= n;
        cov(b, a) = cov(a, b);
      }
    return std::make_pair(std::move(mean), SpdMatrix(std::move(cov)));
  };

  auto [xbar, s1] = moments(x_sample);
  auto [ybar, s2] = moments(y_sample);
  return SampleSummary(n1, n2, std::move(xbar), std::move(ybar), std::move(s1), std::move(s2));
}

/// Squared Mahalanobis distance (mean_side − μ)ᵀ S_side⁻¹ (mean_side − μ).
inline double mahalanobis(const SampleSummary& summary, Side side, const Vector& mu) {
  if (static_cast<int>(mu.size()) != summary.d())
    throw DimensionMismatch("mahalanobis: mu length mismatch");
  return summary.chol(side).quad_form_inv(summary.mean(side) - mu);
}

/// μ̂₀ = (N₁S₁⁻¹ + N₂S₂⁻¹)⁻¹ (N₁S₁⁻¹X̄ + N₂S₂⁻¹Ȳ): the minimizer of
/// N₁·M_X(μ) + N₂·M_Y(μ), i.e. the mean estimate the Wald statistic is
/// built around, and the standard warm start for local methods.
inline Vector wald_mean_mu0(const SampleSummary& summary) {
  const int d = summary.d();
  if (summary.xbar() == summary.ybar()) return summary.xbar();
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      a(i, j) = summary.n1() * summary.s1_inv()(i, j) + summary.n2() * summary.s2_inv()(i, j);
  Vector rhs = mat_vec(summary.s1_inv().matrix(), summary.xbar());
  Vector rhs2 = mat_vec(summary.s2_inv().matrix(), summary.ybar());
  for (int i = 0; i < d; ++i) rhs[i] = summary.n1() * rhs[i] + summary.n2() * rhs2[i];
  return cholesky_spd(SpdMatrix(std::move(a))).solve(rhs);
}

}  // namespace bfp
