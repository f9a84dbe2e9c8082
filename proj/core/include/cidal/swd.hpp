#pragma once

// Sliced Wasserstein distance between two equal-size point clouds.
//
// For directions gamma_1..gamma_L on the unit sphere the estimator is
//
//   SW^2(X, Y) ~= (1/L) sum_l sum_i | <gamma_l, x_{s_l[i]}> - <gamma_l, y_{t_l[i]}> |^2
//
// where s_l, t_l sort the projections of X and Y. The inner sum is over
// samples and is NOT divided by M unless SwdOptions::normalize_by_m is set.

#include <cstdint>
#include <span>

#include "cidal/common.hpp"

namespace cidal {

inline constexpr int kDefaultProjections = 64;

struct ProjectionSet {
  Matrix directions;  // L x p, unit rows
  std::uint64_t seed = 0;

  int count() const { return static_cast<int>(directions.rows()); }
  int dimension() const { return static_cast<int>(directions.cols()); }
};

// Standard-normal draws normalized to unit length; deterministic per seed.
ProjectionSet sample_projections(int dimension, int count, std::uint64_t seed);

// Sum over sorted pairs of squared differences.
double wasserstein1d_sq(std::span<const double> a, std::span<const double> b);

struct SwdOptions {
  // Divide the per-projection sum by M, making the value batch-size independent.
  bool normalize_by_m = false;
};

double sliced_wasserstein_sq(const Matrix& x, const Matrix& y, const ProjectionSet& proj, SwdOptions opts = {});

// Gradient of sliced_wasserstein_sq with respect to the rows of x, holding the
// sort-induced matching fixed.
Matrix sliced_wasserstein_grad_x(const Matrix& x, const Matrix& y, const ProjectionSet& proj, SwdOptions opts = {});

struct SwdValueGrad {
  double value = 0.0;
  Matrix grad_x;
};
SwdValueGrad sliced_wasserstein_value_grad(const Matrix& x, const Matrix& y, const ProjectionSet& proj,
                                           SwdOptions opts = {});

// Exact squared 2-Wasserstein distance between the uniform empirical measures
// on the rows of x and y, by enumerating all n! matchings. Test oracle only.
inline constexpr int kExactWassersteinMaxPoints = 8;
double exact_wasserstein_sq_small(const Matrix& x, const Matrix& y);

// Uniform subsample of `count` rows without replacement; deterministic per seed.
Matrix subsample_rows(const Matrix& x, int count, std::uint64_t seed);

}  // namespace cidal
