#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cidal/checks/oracles.hpp"
#include "cidal/swd.hpp"

using namespace cidal;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double sw_direct(const Matrix& x, const Matrix& y, const ProjectionSet& proj) {
  double total = 0.0;
  for (int l = 0; l < proj.count(); ++l) {
    const Vector px = x * proj.directions.row(l).transpose();
    const Vector py = y * proj.directions.row(l).transpose();
    std::vector<double> a(px.data(), px.data() + px.size()), b(py.data(), py.data() + py.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return total / proj.count();
}

}  // namespace

TEST(Projections, OneDimensionalDirectionsAreSigns) {
  const ProjectionSet p = sample_projections(1, 50, 3);
  for (int l = 0; l < p.count(); ++l) EXPECT_EQ(std::abs(p.directions(l, 0)), 1.0);
}

TEST(Projections, RowsAreUnitAndSeeded) {
  const ProjectionSet p = sample_projections(7, 200, 4);
  for (int l = 0; l < p.count(); ++l) EXPECT_NEAR(p.directions.row(l).norm(), 1.0, 1e-12);
  EXPECT_EQ(sample_projections(7, 200, 4).directions, p.directions);
  EXPECT_NE(sample_projections(7, 200, 5).directions, p.directions);
}

TEST(Projections, MeanDirectionNearZero) {
  const ProjectionSet p = sample_projections(2, 10000, 6);
  EXPECT_LT(p.directions.colwise().mean().norm(), 0.05);
}

TEST(Projections, RejectEmptySizes) {
  EXPECT_THROW(sample_projections(0, 4, 1), ValidationError);
  EXPECT_THROW(sample_projections(3, 0, 1), ValidationError);
}

TEST(Wasserstein1d, HandValues) {
  const std::vector<double> a{0.0, 1.0}, b{1.0, 2.0};
  EXPECT_DOUBLE_EQ(wasserstein1d_sq(a, b), 2.0);
  EXPECT_EQ(wasserstein1d_sq(a, a), 0.0);
  const std::vector<double> c{3.0, -1.0, 2.0}, d{0.0, 5.0, 1.0};
  // sorted: (-1,2,3) vs (0,1,5)
  EXPECT_DOUBLE_EQ(wasserstein1d_sq(c, d), 1.0 + 1.0 + 4.0);
}

TEST(Wasserstein1d, UnequalLengthsRejected) {
  const std::vector<double> a{0.0, 1.0}, b{1.0};
  EXPECT_THROW(wasserstein1d_sq(a, b), ValidationError);
}

TEST(Wasserstein1d, MatchesAssignmentOracle) {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    const Matrix a = random_matrix(n, 1, 100 + trial, 2.0);
    const Matrix b = random_matrix(n, 1, 900 + trial, 2.0);
    const double closed = wasserstein1d_sq({a.data(), static_cast<std::size_t>(n)},
                                           {b.data(), static_cast<std::size_t>(n)});
    EXPECT_NEAR(closed / n, checks::assignment_w2_sq(a, b), 1e-9);
    EXPECT_NEAR(closed / n, exact_wasserstein_sq_small(a, b), 1e-9);
  }
}

TEST(ExactWasserstein, SmallCases) {
  const Matrix x = random_matrix(5, 3, 1);
  EXPECT_EQ(exact_wasserstein_sq_small(x, x), 0.0);
  const Matrix a = random_matrix(1, 3, 2), b = random_matrix(1, 3, 3);
  EXPECT_NEAR(exact_wasserstein_sq_small(a, b), (a - b).squaredNorm(), 1e-14);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = random_matrix(6, 2, 50 + trial), q = random_matrix(6, 2, 80 + trial);
    EXPECT_NEAR(exact_wasserstein_sq_small(p, q), checks::assignment_w2_sq(p, q), 1e-12);
  }
}

TEST(ExactWasserstein, RefusesLargeInstances) {
  const Matrix x = random_matrix(9, 1, 1);
  EXPECT_THROW(exact_wasserstein_sq_small(x, x), ValidationError);
}

TEST(SlicedWasserstein, IdenticalSetsGiveZero) {
  const Matrix x = random_matrix(30, 4, 1);
  EXPECT_EQ(sliced_wasserstein_sq(x, x, sample_projections(4, 64, 2)), 0.0);
}

TEST(SlicedWasserstein, ReducesToOneDimension) {
  const Matrix x = random_matrix(12, 1, 1), y = random_matrix(12, 1, 2);
  ProjectionSet plus;
  plus.directions = Matrix::Ones(1, 1);
  EXPECT_NEAR(sliced_wasserstein_sq(x, y, plus), wasserstein1d_sq({x.data(), 12}, {y.data(), 12}), 1e-12);
}

TEST(SlicedWasserstein, TranslationMatchesPerProjectionExpansion) {
  const Matrix x = random_matrix(20, 3, 5);
  Vector c(3);
  c << 0.7, -1.2, 0.4;
  const Matrix y = x.rowwise() + c.transpose();
  const ProjectionSet proj = sample_projections(3, 64, 6);
  double expected = 0.0;
  for (int l = 0; l < proj.count(); ++l) {
    const double s = proj.directions.row(l).dot(c);
    expected += 20.0 * s * s;
  }
  expected /= proj.count();
  EXPECT_NEAR(sliced_wasserstein_sq(x, y, proj), expected, 1e-10);
  EXPECT_NEAR(sliced_wasserstein_sq(x, y, proj), sw_direct(x, y, proj), 1e-10);
}

TEST(SlicedWasserstein, SymmetricAndNormalizable) {
  const Matrix x = random_matrix(16, 3, 7), y = random_matrix(16, 3, 8, 2.0);
  const ProjectionSet proj = sample_projections(3, 32, 9);
  const double xy = sliced_wasserstein_sq(x, y, proj);
  EXPECT_EQ(xy, sliced_wasserstein_sq(y, x, proj));
  EXPECT_GT(xy, 0.0);
  EXPECT_NEAR(sliced_wasserstein_sq(x, y, proj, {true}), xy / 16.0, 1e-12);
}

TEST(SlicedWasserstein, ShapeMismatchRejected) {
  const ProjectionSet proj = sample_projections(2, 4, 1);
  EXPECT_THROW(sliced_wasserstein_sq(Matrix::Zero(3, 2), Matrix::Zero(4, 2), proj), ValidationError);
  EXPECT_ANY_THROW(sliced_wasserstein_sq(Matrix::Zero(3, 3), Matrix::Zero(3, 3), proj));
}

TEST(SlicedWassersteinGrad, ZeroAtIdenticalSets) {
  const Matrix x = random_matrix(10, 2, 1);
  const Matrix g = sliced_wasserstein_grad_x(x, x, sample_projections(2, 16, 2));
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SlicedWassersteinGrad, MatchesFiniteDifferences) {
  const Matrix x = random_matrix(9, 3, 11), y = random_matrix(9, 3, 12, 1.5);
  const ProjectionSet proj = sample_projections(3, 24, 13);
  for (bool normalize : {false, true}) {
    const SwdValueGrad vg = sliced_wasserstein_value_grad(x, y, proj, {normalize});
    EXPECT_EQ(vg.grad_x, sliced_wasserstein_grad_x(x, y, proj, {normalize}));
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Matrix a = x, b = x;
      a.data()[i] += h;
      b.data()[i] -= h;
      const double fd =
          (sliced_wasserstein_sq(a, y, proj, {normalize}) - sliced_wasserstein_sq(b, y, proj, {normalize})) / (2 * h);
      EXPECT_LT(checks::relative_error(vg.grad_x.data()[i], fd), 1e-5);
    }
  }
}

TEST(SlicedWassersteinGrad, InvariantUnderCommonTranslation) {
  const Matrix x = random_matrix(8, 2, 21), y = random_matrix(8, 2, 22);
  const ProjectionSet proj = sample_projections(2, 16, 23);
  Vector c(2);
  c << 3.0, -5.0;
  const Matrix g0 = sliced_wasserstein_grad_x(x, y, proj);
  const Matrix g1 = sliced_wasserstein_grad_x(x.rowwise() + c.transpose(), y.rowwise() + c.transpose(), proj);
  EXPECT_LT((g0 - g1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SlicedWasserstein, NeverAboveExactDistance) {
  // Each projection is 1-Lipschitz, so the normalized sliced value cannot
  // exceed the exact squared distance.
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_matrix(5, 2, 300 + trial), y = random_matrix(5, 2, 400 + trial);
    const ProjectionSet proj = sample_projections(2, 64, 500 + trial);
    EXPECT_LE(sliced_wasserstein_sq(x, y, proj, {true}), checks::assignment_w2_sq(x, y) + 1e-12);
  }
}

TEST(Subsample, DistinctRowsAndSeeded) {
  Matrix x(10, 1);
  for (int i = 0; i < 10; ++i) x(i, 0) = i;
  const Matrix s = subsample_rows(x, 6, 1);
  std::vector<double> v(s.data(), s.data() + 6);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(std::unique(v.begin(), v.end()), v.end());
  EXPECT_EQ(subsample_rows(x, 6, 1), s);
  EXPECT_THROW(subsample_rows(x, 11, 1), ValidationError);
}
