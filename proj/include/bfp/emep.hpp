#pragma once

// Ellipsoidal Mean Estimation Problem: minimize one squared Mahalanobis
// distance subject to a level bound on the other. A one-time spectral
// reduction turns every level into a univariate secular equation
//   m(λ) = Σ sᵢ²/(Dᵢ+λ)² − v₁
// whose root is found by binary search over geometric intervals followed by
// Newton's method; −λ* is then a subgradient of the optimal value in the
// level, which is what the cutting-lines loop consumes.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bfp/errors.hpp"
#include "bfp/matrixkit.hpp"
#include "bfp/stats_core.hpp"

namespace bfp {

enum class Orientation { ConstraintOnX, ConstraintOnY };

/// One-time spectral reduction of an EMEP orientation. With A the
/// constraint-side covariance and B the objective-side one, diagonalize
/// M = A^{1/2} B⁻¹ A^{1/2} = P D Pᵀ and set s = Pᵀ A^{1/2} B⁻¹ (b̄ − ā).
/// The context is reusable across levels; only O(d) work remains per
/// secular evaluation.
class EmepContext {
 public:
  EmepContext(const SampleSummary& summary, Orientation orientation, double delta = 1e-10)
      : orientation_(orientation), delta_(delta), n_dim_(summary.d()) {
    const Side con = orientation == Orientation::ConstraintOnX ? Side::X : Side::Y;
    const Side opp = orientation == Orientation::ConstraintOnX ? Side::Y : Side::X;
    con_mean_ = summary.mean(con);
    opp_mean_ = summary.mean(opp);
    opp_chol_ = summary.chol(opp);

    sqrt_con_ = spd_sqrt(spectral_decomposition_spd(con == Side::X ? summary.s1() : summary.s2()));

    // M = A^{1/2} B⁻¹ A^{1/2}, built column by column through the cached
    // factor of B.
    const int d = n_dim_;
    Matrix m(d, d);
    for (int j = 0; j < d; ++j) {
      Vector col(d);
      for (int i = 0; i < d; ++i) col[i] = sqrt_con_(i, j);
      Vector w = opp_chol_.solve(col);
      Vector mj = mat_vec(sqrt_con_, w);
      for (int i = 0; i < d; ++i) m(i, j) = mj[i];
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double v = 0.5 * (m(i, j) + m(j, i));
        m(i, j) = v;
        m(j, i) = v;
      }
    decomposition_ = spectral_decomposition_spd(SpdMatrix(std::move(m)));
    if (!(decomposition_.eigenvalues.front() > 0.0))
      throw NotPositiveDefinite(
          "EmepContext: covariance ratio matrix has a nonpositive eigenvalue");

    Vector q = mat_vec(sqrt_con_, opp_chol_.solve(opp_mean_ - con_mean_));
    s_ = mat_t_vec(decomposition_.eigenvectors, q);
    s_norm_ = norm2(s_);
    m_at_zero_ = 0.0;
    for (int i = 0; i < d; ++i) {
      const double r = s_[i] / decomposition_.eigenvalues[i];
      m_at_zero_ += r * r;
    }
  }

  Orientation orientation() const { return orientation_; }
  int dim() const { return n_dim_; }
  double delta() const { return delta_; }
  const SpectralDecomposition& decomposition() const { return decomposition_; }
  const Vector& s() const { return s_; }
  double s_norm() const { return s_norm_; }
  const Vector& constraint_mean() const { return con_mean_; }
  const Vector& objective_mean() const { return opp_mean_; }

  /// Σ sᵢ²/Dᵢ² — the constraint function at λ=0, i.e. the squared distance
  /// of the objective-side mean from the constraint-side mean.
  double secular_at_zero() const { return m_at_zero_; }

  /// μ̂(λ) through the reduction: con_mean + A^{1/2} P (D+λI)⁻¹ s.
  Vector mu_of_lambda(double lambda) const {
    const int d = n_dim_;
    Vector t(d);
    for (int i = 0; i < d; ++i) t[i] = s_[i] / (decomposition_.eigenvalues[i] + lambda);
    Vector w = mat_vec(decomposition_.eigenvectors, t);
    Vector mu = mat_vec(sqrt_con_, w);
    for (int i = 0; i < d; ++i) mu[i] += con_mean_[i];
    return mu;
  }

  /// Squared objective-side Mahalanobis distance at μ.
  double objective_distance(const Vector& mu) const {
    return opp_chol_.quad_form_inv(opp_mean_ - mu);
  }

 private:
  Orientation orientation_;
  double delta_;
  int n_dim_;
  Vector con_mean_, opp_mean_;
  CholeskyFactor opp_chol_;
  Matrix sqrt_con_;
  SpectralDecomposition decomposition_;
  Vector s_;
  double s_norm_ = 0.0;
  double m_at_zero_ = 0.0;
};

inline EmepContext prepare_context(const SampleSummary& summary, Orientation orientation,
                                   double delta = 1e-10) {
  return EmepContext(summary, orientation, delta);
}

/// m(λ) = Σ sᵢ²/(Dᵢ+λ)² − v₁ and m'(λ) = −2 Σ sᵢ²/(Dᵢ+λ)³, both O(d).
inline std::pair<double, double> secular_value_and_derivative(const EmepContext& ctx,
                                                              double lambda, double v1) {
  double m = -v1;
  double mp = 0.0;
  const Vector& s = ctx.s();
  const Vector& d = ctx.decomposition().eigenvalues;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double den = d[i] + lambda;
    const double r = s[i] / den;
    m += r * r;
    mp -= 2.0 * r * r / den;
  }
  return {m, mp};
}

/// Restricted-mean path μ̂(λ) = (S₂⁻¹ + λS₁⁻¹)⁻¹ (S₂⁻¹Ȳ + λS₁⁻¹X̄) for the
/// constraint-on-X orientation (roles swapped for Y). μ̂(0) is the
/// objective-side mean and μ̂(∞) the constraint-side one.
inline Vector mu_hat(const SampleSummary& summary, Orientation orientation, double lambda) {
  const Side con = orientation == Orientation::ConstraintOnX ? Side::X : Side::Y;
  const Side opp = orientation == Orientation::ConstraintOnX ? Side::Y : Side::X;
  const int d = summary.d();
  const SpdMatrix& con_inv = summary.cov_inv(con);
  const SpdMatrix& opp_inv = summary.cov_inv(opp);
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = opp_inv(i, j) + lambda * con_inv(i, j);
  Vector rhs = mat_vec(opp_inv.matrix(), summary.mean(opp));
  Vector rhs2 = mat_vec(con_inv.matrix(), summary.mean(con));
  for (int i = 0; i < d; ++i) rhs[i] += lambda * rhs2[i];
  return cholesky_spd(SpdMatrix(std::move(a))).solve(rhs);
}

struct EmepSolution {
  double lambda_star = 0.0;
  Vector mu_hat;
  double h_value = 0.0;      // minimized squared distance
  double subgradient = 0.0;  // element of ∂h at v1, equals −λ*
  int newton_steps = 0;
  bool active = false;
  std::vector<double> newton_trace;  // λ iterates, starting at the selected left endpoint
};

/// Solves the EMEP at level v1 using the context's reduction.
///
/// Inactive case (m(0) ≤ 0): the objective-side mean is feasible and
/// optimal. Degenerate level v1 = 0: the constraint pins μ to the
/// constraint-side mean and the subgradient is clamped to a finite steep
/// slope −‖s‖/√δ. Otherwise the root is bracketed by
/// b = ‖s‖/√v₁ − D_min (which forces m(b) ≤ 0), located by binary search
/// over intervals growing by the ratio 13/12, and polished by Newton; steps
/// that would exit the current sign-change bracket fall back to bisection.
inline EmepSolution solve_emep(const EmepContext& ctx, double v1) {
  if (v1 < 0.0) throw ConfigError("solve_emep: level must be nonnegative");
  EmepSolution sol;
  const double delta = ctx.delta();
  const double tol_root = 1e-10 * (1.0 + v1);

  if (v1 == 0.0 && ctx.s_norm() > 0.0) {
    sol.lambda_star = ctx.s_norm() / std::sqrt(delta);
    sol.mu_hat = ctx.constraint_mean();
    sol.h_value = ctx.objective_distance(sol.mu_hat);
    sol.subgradient = -sol.lambda_star;
    sol.active = true;
    return sol;
  }

  // the inactive test carries a relative-noise pad: the level often arrives
  // through a different algebraic route than the spectral sum, and a
  // boundary level must resolve as inactive on both
  if (ctx.secular_at_zero() - v1 <= 1e-13 * (ctx.secular_at_zero() + v1 + 1.0)) {
    sol.lambda_star = 0.0;
    sol.mu_hat = ctx.objective_mean();
    sol.h_value = 0.0;
    sol.subgradient = 0.0;
    sol.active = false;
    return sol;
  }

  const double b = ctx.s_norm() / std::sqrt(v1) - ctx.decomposition().eigenvalues.front();
  if (!std::isfinite(b))
    throw BracketFailure("solve_emep: upper bound on the multiplier is not finite");
  const double a = delta;
  // sign-change bracket: m(lo) > 0 ≥ m(hi) throughout
  double lo = 0.0;
  double hi = std::max(b, delta);
  double lambda = 0.5 * (lo + hi);
  double m_abs = std::numeric_limits<double>::infinity();

  const bool root_above_a = secular_value_and_derivative(ctx, a, v1).first > 0.0;
  if (!root_above_a) hi = std::min(hi, a);
  if (b > a && root_above_a) {
    lo = a;
    // binary search over the geometric partition I_i = [a r^i, a r^{i+1}]
    // for the interval containing the root; its left endpoint is an
    // approximate root in Smale's sense, so Newton contracts from step one.
    const double ratio = 1.0 + 1.0 / 12.0;
    const int intervals =
        std::max(1, static_cast<int>(std::ceil(std::log(b / a) / std::log(ratio))));
    int ilo = 0, ihi = intervals - 1;
    while (ilo < ihi) {
      const int mid = ilo + (ihi - ilo) / 2;
      const double right = a * std::pow(ratio, mid + 1);
      if (secular_value_and_derivative(ctx, right, v1).first > 0.0) {
        ilo = mid + 1;
        lo = std::max(lo, right);
      } else {
        ihi = mid;
        hi = std::min(hi, right);
      }
    }
    lambda = a * std::pow(ratio, ilo);

    const int schedule =
        1 + static_cast<int>(std::ceil(
                std::log2(1.0 + std::max(0.0, std::log2(std::max(b, delta) / delta)))));
    sol.newton_trace.push_back(lambda);
    for (int k = 0; k < schedule; ++k) {
      const auto [m, mp] = secular_value_and_derivative(ctx, lambda, v1);
      if (m > 0.0)
        lo = std::max(lo, lambda);
      else
        hi = std::min(hi, lambda);
      m_abs = std::abs(m);
      if (m_abs <= tol_root) break;
      if (!(mp < 0.0)) break;
      double next = lambda - m / mp;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // FP safeguard
      if (next == lambda) break;
      lambda = next;
      sol.newton_trace.push_back(lambda);
      ++sol.newton_steps;
    }
  }

  // Bracket polish: guarantees |λ̂ − λ*| ≤ δ/2 and pushes the residual under
  // tol_root (Newton approaches the root from the left, so the right side of
  // the bracket is still wide at this point). Also resolves the tiny-root
  // case where the root lies in (0, δ].
  int guard = 0;
  while ((hi - lo > 0.5 * delta || m_abs > tol_root) && guard++ < 400) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;  // FP floor reached
    const double mm = secular_value_and_derivative(ctx, mid, v1).first;
    if (mm > 0.0)
      lo = mid;
    else
      hi = mid;
    lambda = mid;
    m_abs = std::abs(mm);
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw BracketFailure("solve_emep: root bracket collapsed with m(0) > 0");

  sol.lambda_star = lambda;
  sol.mu_hat = ctx.mu_of_lambda(lambda);
  sol.h_value = ctx.objective_distance(sol.mu_hat);
  sol.subgradient = -lambda;
  sol.active = true;
  return sol;
}

struct BorderValue {
  double u2 = 1.0;
  double slope = 0.0;  // element of ∂g(u1), nonpositive
  Vector mu;
};

/// Border function of the projected feasible set: g(u1) = 1 + h(u1 − 1),
/// together with a subgradient −λ* and the attaining mean.
inline BorderValue g_eval(const EmepContext& ctx, double u1) {
  if (u1 < 1.0) throw ConfigError("g_eval: u1 must be at least 1");
  EmepSolution sol = solve_emep(ctx, u1 - 1.0);
  return BorderValue{1.0 + sol.h_value, sol.subgradient, std::move(sol.mu_hat)};
}

}  // namespace bfp
