#include "cidal/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cidal {

namespace {

std::vector<Matrix> cholesky_factors(const GmmState& gmm) {
  std::vector<Matrix> factors;
  factors.reserve(gmm.covariances.size());
  for (int j = 0; j < gmm.k; ++j) {
    Eigen::LLT<Matrix> llt(gmm.covariances[static_cast<std::size_t>(j)]);
    if (llt.info() != Eigen::Success)
      throw ValidationError("covariance of component " + std::to_string(j) +
                            " is not positive definite (missing regularization?)");
    factors.push_back(llt.matrixL());
  }
  return factors;
}

}  // namespace

void GmmState::validate() const {
  require(k >= 1, "mixture needs at least one component");
  require(weights.size() == k && means.rows() == k && static_cast<int>(covariances.size()) == k,
          "mixture parameter counts disagree with k");
  require((weights.array() >= 0.0).all(), "mixture weights must be non-negative");
  require(std::abs(weights.sum() - 1.0) <= 1e-9, "mixture weights must sum to 1");
  for (int j = 0; j < k; ++j) {
    const Matrix& c = covariances[static_cast<std::size_t>(j)];
    require(c.rows() == means.cols() && c.cols() == means.cols(), "covariance shape mismatch");
    require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()),
            "covariance " + std::to_string(j) + " is not symmetric");
    Eigen::LLT<Matrix> llt(c);
    require(llt.info() == Eigen::Success, "covariance " + std::to_string(j) + " is not positive definite");
  }
}

double CovarianceRegularization::epsilon_for(const Matrix& scatter) const {
  const double p = static_cast<double>(std::max<Eigen::Index>(scatter.rows(), 1));
  return std::max(relative * scatter.trace() / p, floor);
}

GmmState fit_map(const Matrix& embeddings, std::span<const int> labels, int k, CovarianceRegularization reg,
                 const GmmState* fallback) {
  require(embeddings.rows() >= 1, "fit_map needs at least one embedding");
  require(static_cast<Eigen::Index>(labels.size()) == embeddings.rows(), "label count does not match embeddings");
  require(k >= 1, "fit_map needs k >= 1");
  const Eigen::Index p = embeddings.cols();
  if (fallback) require(fallback->k == k && fallback->dimension() == p, "fallback mixture shape mismatch");

  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  Matrix sums = Matrix::Zero(k, p);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    require(y >= 0 && y < k, "label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    ++counts[static_cast<std::size_t>(y)];
    sums.row(y) += embeddings.row(static_cast<Eigen::Index>(i));
  }

  GmmState g;
  g.k = k;
  g.weights = Vector::Zero(k);
  g.means = Matrix::Zero(k, p);
  g.covariances.assign(static_cast<std::size_t>(k), Matrix::Zero(p, p));
  const double n = static_cast<double>(embeddings.rows());
  for (int j = 0; j < k; ++j) {
    const int c = counts[static_cast<std::size_t>(j)];
    if (c > 0) {
      g.weights(j) = c / n;
      g.means.row(j) = sums.row(j) / static_cast<double>(c);
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const Vector d = (embeddings.row(static_cast<Eigen::Index>(i)) - g.means.row(y)).transpose();
    g.covariances[static_cast<std::size_t>(y)] += d * d.transpose();
  }

  bool used_fallback = false;
  for (int j = 0; j < k; ++j) {
    const int c = counts[static_cast<std::size_t>(j)];
    Matrix& cov = g.covariances[static_cast<std::size_t>(j)];
    if (c == 0) {
      if (!fallback) throw ValidationError("class " + std::to_string(j) + " has no members and no fallback");
      g.means.row(j) = fallback->means.row(j);
      cov = fallback->covariances[static_cast<std::size_t>(j)];
      g.weights(j) = fallback->weights(j);
      used_fallback = true;
      continue;
    }
    cov /= static_cast<double>(c);
    const double eps = reg.epsilon_for(cov);
    cov.diagonal().array() += eps;
    g.reg_epsilon = std::max(g.reg_epsilon, eps);
  }
  if (used_fallback) {
    const double total = g.weights.sum();
    require(total > 0.0, "mixture weights vanished after fallback");
    g.weights /= total;
  }
  return g;
}

GmmSamples sample(const GmmState& gmm, int n, std::uint64_t seed) {
  require(n >= 0, "sample count must be non-negative");
  const auto factors = cholesky_factors(gmm);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> component(gmm.weights.data(), gmm.weights.data() + gmm.weights.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index p = gmm.dimension();

  GmmSamples out{Matrix(n, p), Labels(static_cast<std::size_t>(n))};
  Vector e(p);
  for (int i = 0; i < n; ++i) {
    const int j = component(rng);
    for (Eigen::Index c = 0; c < p; ++c) e(c) = normal(rng);
    out.z.row(i) = gmm.means.row(j) + (factors[static_cast<std::size_t>(j)] * e).transpose();
    out.component_ids[static_cast<std::size_t>(i)] = j;
  }
  return out;
}

double log_density(const GmmState& gmm, const Vector& z) {
  require_shape(z.size() == gmm.dimension(), "point width does not match mixture dimension");
  const auto factors = cholesky_factors(gmm);
  const double p = static_cast<double>(gmm.dimension());
  std::vector<double> terms;
  for (int j = 0; j < gmm.k; ++j) {
    if (gmm.weights(j) <= 0.0) continue;
    const Matrix& l = factors[static_cast<std::size_t>(j)];
    const Vector diff = z - gmm.means.row(j).transpose();
    const Vector w = l.triangularView<Eigen::Lower>().solve(diff);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    terms.push_back(std::log(gmm.weights(j)) - 0.5 * (p * std::log(2.0 * std::numbers::pi) + log_det + w.squaredNorm()));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

PseudoDataset draw_pseudo_dataset(const GmmState& gmm, const ModelParams& model, int n_target, double tau,
                                  int max_attempts, std::uint64_t seed) {
  require(n_target >= 1, "pseudo-dataset size must be >= 1");
  require(tau >= 0.0 && tau < 1.0, "confidence threshold must lie in [0, 1)");
  require(max_attempts >= 1, "max_attempts must be >= 1");
  require_shape(gmm.dimension() == model.embedding_width(), "mixture dimension does not match embedding width");
  require_shape(gmm.k == model.class_count(), "mixture has " + std::to_string(gmm.k) + " components but model has " +
                                                  std::to_string(model.class_count()) + " classes");

  PseudoDataset out;
  out.requested = n_target;
  std::vector<Vector> kept_z;
  std::vector<double> kept_conf;
  int chunk_index = 0;
  while (out.size() < n_target && out.attempts < max_attempts) {
    const int chunk = std::min(std::max(n_target - out.size(), 64), max_attempts - out.attempts);
    const GmmSamples draws = sample(gmm, chunk, derive_seed(seed, chunk_index++));
    const Matrix probs = softmax(classify_from_embedding(model, draws.z));
    for (int i = 0; i < chunk && out.size() < n_target; ++i) {
      ++out.attempts;
      Eigen::Index label = 0;
      const double conf = probs.row(i).maxCoeff(&label);
      if (conf > tau) {
        kept_z.push_back(draws.z.row(i).transpose());
        kept_conf.push_back(conf);
        out.labels.push_back(static_cast<int>(label));
      }
    }
  }
  if (out.labels.empty())
    throw ValidationError("pseudo-set empty: no draw exceeded confidence " + std::to_string(tau) + " after " +
                          std::to_string(out.attempts) + " attempts");

  out.z.resize(out.size(), gmm.dimension());
  out.confidence.resize(out.size());
  for (int i = 0; i < out.size(); ++i) {
    out.z.row(i) = kept_z[static_cast<std::size_t>(i)].transpose();
    out.confidence(i) = kept_conf[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace cidal
