#pragma once

// Reference implementations used to cross-check the library. Each one is
// written from the defining formula, deliberately sharing no code with the
// routine it checks.

#include <cstdint>
#include <span>
#include <vector>

#include "cidal/common.hpp"
#include "cidal/nn.hpp"
#include "cidal/swd.hpp"
#include "cidal/trainer.hpp"

namespace cidal::checks {

// Squared 2-Wasserstein distance between uniform empirical measures of equal
// size, (1/n) min over assignments of sum ||x_i - y_pi(i)||^2. Exact, via
// dynamic programming over subsets of y; n <= 16.
double assignment_w2_sq(const Matrix& x, const Matrix& y);

// Class-conditional moments written out as plain loops.
struct DirectMoments {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;                     // k x p
  std::vector<std::vector<std::vector<double>>> covariances;  // k x p x p, ridge included
};

// Weight n_j / n, mean, average centered outer product, then a ridge of
// max(1e-4 * trace / p, 1e-6) on the diagonal. Every class must be present.
DirectMoments direct_map_moments(const Matrix& embeddings, std::span<const int> labels, int k);

// Row ids selected per class (grouped by class, nearest first) by sorting
// every candidate of the class on (squared distance to its mean, row id).
std::vector<int> sorted_mof_rows(const Matrix& embeddings, std::span<const int> labels, const Matrix& means,
                                 std::span<const int> budget);

// Parameters flattened in layer order: encoder then classifier, each layer's
// weight (row-major) followed by its bias.
std::vector<double> flatten(const ModelParams& params);
ModelParams unflatten(const ModelParams& shape, std::span<const double> values);

// Unit vector in parameter space with standard-normal direction.
std::vector<double> random_direction(std::size_t n, std::uint64_t seed);

// Everything that selects a smooth piece of the adaptation loss: the sign of
// every relu pre-activation and the rank order of every projected embedding.
// Two parameter vectors with equal signatures lie on the same smooth piece.
std::vector<int> piecewise_signature(const ModelParams& model, const AdaptationBatch& batch,
                                     const ProjectionSet& proj);

// Relative disagreement |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-8);

}  // namespace cidal::checks
