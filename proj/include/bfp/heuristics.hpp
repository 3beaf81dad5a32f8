#pragma once

// Local methods for the reduced likelihood objective
//   φ(μ) = (N₁/2)·ln(1+M_X(μ)) + (N₂/2)·ln(1+M_Y(μ)),
// all started from the Wald mean μ̂₀ and clamped to never report a point
// worse than the start: a fixed-point update, damped Newton with
// backtracking, and random-walk annealing. These are the baselines the
// certified solver is compared against.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bfp/distributions.hpp"
#include "bfp/errors.hpp"
#include "bfp/matrixkit.hpp"
#include "bfp/solvers.hpp"
#include "bfp/stats_core.hpp"

namespace bfp {

inline double reduced_objective(const SampleSummary& summary, const Vector& mu) {
  return 0.5 * summary.n1() * std::log1p(mahalanobis(summary, Side::X, mu)) +
         0.5 * summary.n2() * std::log1p(mahalanobis(summary, Side::Y, mu));
}

/// ∇φ(μ) = −N₁ S₁⁻¹(X̄−μ)/(1+M_X) − N₂ S₂⁻¹(Ȳ−μ)/(1+M_Y).
inline Vector reduced_gradient(const SampleSummary& summary, const Vector& mu) {
  const int d = summary.d();
  Vector rx = summary.xbar() - mu;
  Vector ry = summary.ybar() - mu;
  Vector gx = mat_vec(summary.s1_inv().matrix(), rx);
  Vector gy = mat_vec(summary.s2_inv().matrix(), ry);
  const double wx = summary.n1() / (1.0 + dot(rx, gx));
  const double wy = summary.n2() / (1.0 + dot(ry, gy));
  Vector g(d);
  for (int i = 0; i < d; ++i) g[i] = -wx * gx[i] - wy * gy[i];
  return g;
}

struct HeuristicResult {
  Vector mu;
  double objective = 0.0;
  int iterations = 0;
  std::string method;
  bool converged = true;
};

namespace detail {

inline HeuristicResult clamp_to_start(HeuristicResult r, const SampleSummary& summary,
                                      const Vector& start, double start_value) {
  if (r.objective > start_value) {
    r.mu = start;
    r.objective = start_value;
  }
  (void)summary;
  return r;
}

}  // namespace detail

/// Fixed point of the first-order conditions: with Σ̂ᵢ(μ) = Sᵢ + rᵢrᵢᵀ the
/// covariance MLEs at the current mean, the next mean re-solves the
/// weighted least squares combination. Σ̂ᵢ⁻¹ comes from the rank-one update
/// of the cached Sᵢ⁻¹.
inline HeuristicResult iterative_update(const SampleSummary& summary, double tol = 1e-10,
                                        int max_iter = 500) {
  if (!(tol > 0.0)) throw ConfigError("iterative_update: tol must be positive");
  const int d = summary.d();
  Vector mu = wald_mean_mu0(summary);
  const Vector start = mu;
  const double start_value = reduced_objective(summary, mu);

  HeuristicResult result;
  result.method = "ItUp";
  int k = 0;  // counts updates that actually moved the point
  bool converged = false;
  for (int guard = 0; guard < max_iter; ++guard) {
    const SpdMatrix h1 = rank_one_inverse_update(summary.s1_inv(), summary.xbar() - mu);
    const SpdMatrix h2 = rank_one_inverse_update(summary.s2_inv(), summary.ybar() - mu);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = summary.n1() * h1(i, j) + summary.n2() * h2(i, j);
    Vector rhs = mat_vec(h1.matrix(), summary.xbar());
    Vector rhs2 = mat_vec(h2.matrix(), summary.ybar());
    for (int i = 0; i < d; ++i) rhs[i] = summary.n1() * rhs[i] + summary.n2() * rhs2[i];
    Vector next = cholesky_spd(SpdMatrix(std::move(a))).solve(rhs);
    const double move = norm_inf(next - mu);
    mu = std::move(next);
    if (move <= tol) {
      converged = true;
      break;
    }
    ++k;
  }
  result.iterations = k;
  result.converged = converged || norm_inf(reduced_gradient(summary, mu)) <= 1e-6;
  result.mu = std::move(mu);
  result.objective = reduced_objective(summary, result.mu);
  return detail::clamp_to_start(std::move(result), summary, start, start_value);
}

/// Damped Newton with Armijo backtracking on φ. A Hessian that fails to
/// factor falls back to a plain gradient step for that iteration.
inline HeuristicResult newton_linesearch(const SampleSummary& summary, double tol = 1e-8,
                                         int max_iter = 200) {
  if (!(tol > 0.0)) throw ConfigError("newton_linesearch: tol must be positive");
  const int d = summary.d();
  Vector mu = wald_mean_mu0(summary);
  const Vector start = mu;
  const double start_value = reduced_objective(summary, mu);

  HeuristicResult result;
  result.method = "NM";
  double value = start_value;
  int k = 0;
  for (; k < max_iter; ++k) {
    Vector grad = reduced_gradient(summary, mu);
    if (norm_inf(grad) <= tol) break;

    // Hessian: Σᵢ Nᵢ [Aᵢ/(1+Mᵢ) − 2 Aᵢrᵢrᵢᵀ Aᵢ/(1+Mᵢ)²], Aᵢ = Sᵢ⁻¹
    Vector rx = summary.xbar() - mu;
    Vector ry = summary.ybar() - mu;
    Vector gx = mat_vec(summary.s1_inv().matrix(), rx);
    Vector gy = mat_vec(summary.s2_inv().matrix(), ry);
    const double mx = dot(rx, gx);
    const double my = dot(ry, gy);
    Matrix h(d, d);
    const double cx = summary.n1() / (1.0 + mx);
    const double cy = summary.n2() / (1.0 + my);
    const double cx2 = 2.0 * summary.n1() / ((1.0 + mx) * (1.0 + mx));
    const double cy2 = 2.0 * summary.n2() / ((1.0 + my) * (1.0 + my));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        h(i, j) = cx * summary.s1_inv()(i, j) + cy * summary.s2_inv()(i, j) -
                  cx2 * gx[i] * gx[j] - cy2 * gy[i] * gy[j];

    Vector step(d);
    try {
      step = cholesky_spd(SpdMatrix(std::move(h))).solve(grad);
    } catch (const Error&) {
      step = grad;  // gradient fallback
    }
    for (int i = 0; i < d; ++i) step[i] = -step[i];

    double directional = dot(grad, step);
    if (directional >= 0.0) {  // not a descent direction; use the gradient
      for (int i = 0; i < d; ++i) step[i] = -grad[i];
      directional = -dot(grad, grad);
    }

    double t = 1.0;
    Vector trial(d);
    double trial_value = value;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < d; ++i) trial[i] = mu[i] + t * step[i];
      trial_value = reduced_objective(summary, trial);
      if (trial_value <= value + 1e-4 * t * directional) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    mu = trial;
    value = trial_value;
  }
  result.iterations = k;
  result.converged = k < max_iter;
  result.mu = std::move(mu);
  result.objective = value;
  return detail::clamp_to_start(std::move(result), summary, start, start_value);
}

/// Random-walk Metropolis with geometric cooling. Step scale follows the
/// mean separation (the diagonal of the bounding triangle in the sample
/// metrics); returns the best visited point.
inline HeuristicResult simulated_annealing(const SampleSummary& summary, RngStream& rng,
                                           int iters = 1000) {
  if (iters < 1) throw ConfigError("simulated_annealing: iters must be at least 1");
  const int d = summary.d();
  Vector mu = wald_mean_mu0(summary);
  const Vector start = mu;
  const double start_value = reduced_objective(summary, mu);

  const Bounds bounds = compute_bounds(summary);
  const double diag = std::sqrt((bounds.u1_bar - 1.0) + (bounds.u2_bar - 1.0));
  const double scale = 0.1 * (norm2(summary.xbar() - summary.ybar()) + diag) / std::sqrt(d) + 1e-9;

  double temp = start_value / 10.0 + 1e-6;
  const double cooling = 0.995;
  double current_value = start_value;
  Vector best = mu;
  double best_value = start_value;

  Vector proposal(d);
  for (int k = 0; k < iters; ++k) {
    for (int i = 0; i < d; ++i) proposal[i] = mu[i] + scale * rng.normal();
    const double value = reduced_objective(summary, proposal);
    const double delta = value - current_value;
    if (delta < 0.0 || rng.uniform01() < std::exp(-delta / temp)) {
      mu = proposal;
      current_value = value;
      if (value < best_value) {
        best_value = value;
        best = mu;
      }
    }
    temp *= cooling;
  }

  HeuristicResult result;
  result.method = "SA";
  result.iterations = iters;
  result.mu = std::move(best);
  result.objective = best_value;
  return detail::clamp_to_start(std::move(result), summary, start, start_value);
}

}  // namespace bfp
