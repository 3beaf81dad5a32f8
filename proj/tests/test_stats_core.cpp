#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bfp/distributions.hpp"
#include "bfp/stats_core.hpp"

using namespace bfp;

namespace {

Matrix from_rows(const std::vector<Vector>& rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][j];
  return m;
}

Matrix random_sample(RngStream& rng, int n, const Vector& mean, const CholeskyFactor& l) {
  std::vector<Vector> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows.push_back(sample_mvn(rng, mean, l));
  return from_rows(rows);
}

SampleSummary random_summary(RngStream& rng, int d, int n1, int n2) {
  const SpdMatrix sigma1 = random_spd(rng, d);
  const SpdMatrix sigma2 = random_spd(rng, d);
  const Vector zero(d, 0.0);
  return summarize(random_sample(rng, n1, zero, cholesky_spd(sigma1)),
                   random_sample(rng, n2, zero, cholesky_spd(sigma2)));
}

}  // namespace

TEST_CASE("summarize a two-point scalar sample") {
  const Matrix x = from_rows({{0.0}, {2.0}});
  const Matrix y = from_rows({{1.0}, {3.0}, {5.0}});
  const SampleSummary s = summarize(x, y);
  CHECK(s.xbar()[0] == 1.0);
  CHECK(s.s1()(0, 0) == 1.0);  // divisor N, not N-1
  CHECK(s.ybar()[0] == 3.0);
  CHECK(s.s2()(0, 0) == Catch::Approx(8.0 / 3.0));
}

TEST_CASE("summarize rejects degenerate data") {
  const Matrix constant = from_rows({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  const Matrix fine = from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(summarize(constant, fine), DegenerateSample);
  // too few rows: N <= d
  const Matrix narrow = from_rows({{0.0, 0.0}, {1.0, 0.5}});
  CHECK_THROWS_AS(summarize(narrow, fine), DegenerateSample);
}

TEST_CASE("summarize covariance matches the direct sum") {
  RngStream rng(11, 0);
  const int d = 3, n = 20;
  const SpdMatrix sigma = random_spd(rng, d);
  const Matrix x = random_sample(rng, n, Vector(d, 0.0), cholesky_spd(sigma));
  const Matrix y = random_sample(rng, n, Vector(d, 0.0), cholesky_spd(sigma));
  const SampleSummary s = summarize(x, y);

  Vector mean(d, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) mean[j] += x(i, j) / n;
  Matrix direct(d, d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        direct(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / n;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) REQUIRE(s.s1()(a, b) == Catch::Approx(direct(a, b)).margin(1e-12));
}

TEST_CASE("mahalanobis basics") {
  const Matrix x = from_rows({{1.0}, {3.0}});  // xbar 2, S1 = 1
  const Matrix y = from_rows({{0.0}, {4.0}});
  SampleSummary s = summarize(x, y);
  CHECK(mahalanobis(s, Side::X, s.xbar()) == 0.0);

  // d=1, xbar=2, S1=[4], mu=0 -> 1
  const Matrix x2 = from_rows({{0.0}, {4.0}});  // xbar 2, S1 = 4
  SampleSummary s2 = summarize(x2, y);
  CHECK(mahalanobis(s2, Side::X, Vector{0.0}) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("mahalanobis agrees with the explicit inverse") {
  RngStream rng(12, 0);
  const SampleSummary s = random_summary(rng, 4, 12, 15);
  Vector mu(4);
  for (auto& v : mu) v = rng.normal();
  const Vector r = s.xbar() - mu;
  const double direct = dot(r, mat_vec(s.s1_inv().matrix(), r));
  CHECK(mahalanobis(s, Side::X, mu) == Catch::Approx(direct).margin(1e-10 * (1.0 + direct)));
}

TEST_CASE("mahalanobis is convex in mu") {
  RngStream rng(13, 0);
  const SampleSummary s = random_summary(rng, 3, 10, 12);
  for (int trial = 0; trial < 200; ++trial) {
    Vector a(3), b(3);
    for (auto& v : a) v = 3.0 * rng.normal();
    for (auto& v : b) v = 3.0 * rng.normal();
    const double t = rng.uniform01();
    Vector mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = t * a[i] + (1.0 - t) * b[i];
    const double lhs = mahalanobis(s, Side::Y, mix);
    const double rhs = t * mahalanobis(s, Side::Y, a) + (1.0 - t) * mahalanobis(s, Side::Y, b);
    REQUIRE(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("wald_mean_mu0 reduces to the obvious answers") {
  // equal means: mu0 is that mean
  const Matrix x = from_rows({{1.0}, {3.0}});
  const Matrix y = from_rows({{0.0}, {4.0}});
  const SampleSummary s = summarize(x, y);  // xbar = ybar = 2
  CHECK(wald_mean_mu0(s)[0] == Catch::Approx(2.0).margin(1e-14));

  // equal sizes and covariances: the midpoint
  const Matrix x2 = from_rows({{-1.0}, {1.0}});       // mean 0, var 1
  const Matrix y2 = from_rows({{9.0}, {11.0}});       // mean 10, var 1
  const SampleSummary s2 = summarize(x2, y2);
  CHECK(wald_mean_mu0(s2)[0] == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("wald_mean_mu0 is the stationary point of the weighted distance sum") {
  RngStream rng(14, 0);
  const SampleSummary s = random_summary(rng, 3, 15, 25);
  const Vector mu0 = wald_mean_mu0(s);
  // gradient N1 S1^-1 (xbar - mu) + N2 S2^-1 (ybar - mu) must vanish
  Vector g1 = mat_vec(s.s1_inv().matrix(), s.xbar() - mu0);
  Vector g2 = mat_vec(s.s2_inv().matrix(), s.ybar() - mu0);
  for (int i = 0; i < 3; ++i) REQUIRE(std::abs(s.n1() * g1[i] + s.n2() * g2[i]) <= 1e-9);
}

TEST_CASE("mahalanobis is affine equivariant") {
  RngStream rng(15, 0);
  const int d = 3;
  for (int trial = 0; trial < 30; ++trial) {
    const SpdMatrix sigma1 = random_spd(rng, d);
    const SpdMatrix sigma2 = random_spd(rng, d);
    const Vector zero(d, 0.0);
    const Matrix x = random_sample(rng, 9, zero, cholesky_spd(sigma1));
    const Matrix y = random_sample(rng, 11, zero, cholesky_spd(sigma2));

    // well-conditioned random invertible A and shift b
    const Matrix q = spd_sqrt(random_spd(rng, d));
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = q(i, j) + (i == j ? 0.5 : 0.0);
    Vector shift(d);
    for (auto& v : shift) v = rng.normal();

    auto transform = [&](const Matrix& sample) {
      Matrix t(sample.rows(), d);
      for (int i = 0; i < sample.rows(); ++i) {
        const Vector row = mat_vec(a, sample.row_vector(i)) + shift;
        for (int j = 0; j < d; ++j) t(i, j) = row[j];
      }
      return t;
    };

    const SampleSummary s = summarize(x, y);
    const SampleSummary st = summarize(transform(x), transform(y));
    Vector mu(d);
    for (auto& v : mu) v = rng.normal();
    const Vector mu_t = mat_vec(a, mu) + shift;
    const double before = mahalanobis(s, Side::X, mu);
    const double after = mahalanobis(st, Side::X, mu_t);
    REQUIRE(after == Catch::Approx(before).epsilon(1e-8));
  }
}
