#pragma once

// Class-conditional Gaussian mixture over the embedding space: one component
// per class, fitted in closed form from labeled embeddings.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cidal/common.hpp"
#include "cidal/nn.hpp"

namespace cidal {

struct GmmState {
  int k = 0;
  Vector weights;                   // k, a probability vector
  Matrix means;                     // k x p
  std::vector<Matrix> covariances;  // k matrices p x p
  double reg_epsilon = 0.0;         // largest ridge added to any covariance

  int dimension() const { return static_cast<int>(means.cols()); }

  // Throws ValidationError if weights are not a probability vector or a
  // covariance is not symmetric positive definite.
  void validate() const;
};

// Ridge added to a class covariance: max(relative * trace / p, floor).
struct CovarianceRegularization {
  double relative = 1e-4;
  double floor = 1e-6;

  static CovarianceRegularization fixed(double epsilon) { return {0.0, epsilon}; }
  double epsilon_for(const Matrix& scatter) const;
};

// MAP estimates: weight = class share, mean = class average, covariance =
// class average of centered outer products plus a ridge. A class with no
// members takes its component (and weight, before renormalization) from
// `fallback`; without a fallback it is a ValidationError.
GmmState fit_map(const Matrix& embeddings, std::span<const int> labels, int k,
                 CovarianceRegularization reg = {}, const GmmState* fallback = nullptr);

struct GmmSamples {
  Matrix z;
  Labels component_ids;
};

// component ~ weights, z = mean + chol(cov) * N(0, I).
GmmSamples sample(const GmmState& gmm, int n, std::uint64_t seed);

// log sum_j weight_j N(z | mean_j, cov_j), via log-sum-exp.
double log_density(const GmmState& gmm, const Vector& z);

struct PseudoDataset {
  Matrix z;
  Labels labels;
  Vector confidence;
  int requested = 0;
  int attempts = 0;

  int size() const { return static_cast<int>(labels.size()); }
};

inline constexpr int kPseudoAttemptFactor = 20;

// Draws z from the mixture, labels each by the classifier head and keeps it
// when the top softmax probability exceeds `tau`. Stops after `n_target`
// accepted draws or `max_attempts` total draws. Throws ValidationError when
// nothing was accepted.
PseudoDataset draw_pseudo_dataset(const GmmState& gmm, const ModelParams& model, int n_target, double tau,
                                  int max_attempts, std::uint64_t seed);

}  // namespace cidal
