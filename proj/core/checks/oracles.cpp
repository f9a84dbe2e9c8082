#include "cidal/checks/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace cidal::checks {

double assignment_w2_sq(const Matrix& x, const Matrix& y) {
  require(x.rows() == y.rows() && x.rows() >= 1 && x.rows() <= 16, "assignment oracle needs 1 <= n <= 16");
  require_shape(x.cols() == y.cols(), "point widths differ");
  const int n = static_cast<int>(x.rows());
  const std::size_t full = std::size_t{1} << n;
  // best[mask]: cheapest matching of x_0..x_{popcount-1} onto the y's in mask.
  std::vector<double> best(full, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(best[mask])) continue;
    const int i = std::popcount(mask);
    if (i == n) continue;
    for (int j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      double c = 0.0;
      for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double diff = x(i, d) - y(j, d);
        c += diff * diff;
      }
      auto& slot = best[mask | (std::size_t{1} << j)];
      slot = std::min(slot, best[mask] + c);
    }
  }
  return best[full - 1] / n;
}

DirectMoments direct_map_moments(const Matrix& embeddings, std::span<const int> labels, int k) {
  const std::size_t n = labels.size();
  const std::size_t p = static_cast<std::size_t>(embeddings.cols());
  DirectMoments m;
  m.weights.assign(static_cast<std::size_t>(k), 0.0);
  m.means.assign(static_cast<std::size_t>(k), std::vector<double>(p, 0.0));
  m.covariances.assign(static_cast<std::size_t>(k), std::vector<std::vector<double>>(p, std::vector<double>(p, 0.0)));

  for (int j = 0; j < k; ++j) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == j) members.push_back(i);
    require(!members.empty(), "direct moments need every class present");
    const double nj = static_cast<double>(members.size());
    auto& mu = m.means[static_cast<std::size_t>(j)];
    auto& cov = m.covariances[static_cast<std::size_t>(j)];

    m.weights[static_cast<std::size_t>(j)] = nj / static_cast<double>(n);
    for (std::size_t i : members)
      for (std::size_t a = 0; a < p; ++a) mu[a] += embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
    for (double& v : mu) v /= nj;

    for (std::size_t i : members)
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
          cov[a][b] += (embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) - mu[a]) *
                       (embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) - mu[b]);
    double trace = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) cov[a][b] /= nj;
      trace += cov[a][a];
    }
    const double ridge = std::max(1e-4 * trace / static_cast<double>(p), 1e-6);
    for (std::size_t a = 0; a < p; ++a) cov[a][a] += ridge;
  }
  return m;
}

std::vector<int> sorted_mof_rows(const Matrix& embeddings, std::span<const int> labels, const Matrix& means,
                                 std::span<const int> budget) {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(means.rows()); ++j) {
    struct Candidate {
      double distance;
      int row;
    };
    std::vector<Candidate> all;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != j) continue;
      double d = 0.0;
      for (Eigen::Index c = 0; c < means.cols(); ++c) {
        const double diff = means(j, c) - embeddings(static_cast<Eigen::Index>(i), c);
        d += diff * diff;
      }
      all.push_back({d, static_cast<int>(i)});
    }
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
    });
    const std::size_t take = std::min(all.size(), static_cast<std::size_t>(budget[static_cast<std::size_t>(j)]));
    for (std::size_t i = 0; i < take; ++i) out.push_back(all[i].row);
  }
  return out;
}

namespace {

template <typename F>
void for_each_layer(const ModelParams& m, F&& f) {
  for (const Layer& l : m.encoder) f(l);
  for (const Layer& l : m.classifier) f(l);
}

}  // namespace

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> out;
  for_each_layer(params, [&](const Layer& l) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  });
  return out;
}

ModelParams unflatten(const ModelParams& shape, std::span<const double> values) {
  require_shape(values.size() == shape.parameter_count(), "flat parameter vector has the wrong length");
  ModelParams out = shape;
  std::size_t at = 0;
  auto fill = [&](Layer& l) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = values[at++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = values[at++];
  };
  for (Layer& l : out.encoder) fill(l);
  for (Layer& l : out.classifier) fill(l);
  return out;
}

std::vector<double> random_direction(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  double norm = 0.0;
  for (double& x : v) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

namespace {

void append_relu_signs(std::vector<int>& sig, const std::vector<Layer>& layers, const StackCache& cache) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].activation != Activation::relu) continue;
    const Matrix& pre = cache[l].pre;
    for (Eigen::Index i = 0; i < pre.size(); ++i) sig.push_back(pre.data()[i] > 0.0 ? 1 : 0);
  }
}

void append_ranks(std::vector<int>& sig, const Matrix& emb, const ProjectionSet& proj) {
  for (int l = 0; l < proj.count(); ++l) {
    const Vector v = emb * proj.directions.row(l).transpose();
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) < v(b); });
    sig.insert(sig.end(), idx.begin(), idx.end());
  }
}

}  // namespace

std::vector<int> piecewise_signature(const ModelParams& model, const AdaptationBatch& batch,
                                     const ProjectionSet& proj) {
  std::vector<int> sig;
  const HeadResult head = forward_head(model, batch.pseudo_z);
  append_relu_signs(sig, model.classifier, head.cache);
  auto full = [&](const Matrix& inputs) {
    const ForwardResult f = forward(model, inputs);
    append_relu_signs(sig, model.encoder, f.cache.encoder);
    append_relu_signs(sig, model.classifier, f.cache.classifier);
    append_ranks(sig, f.embeddings, proj);
  };
  full(batch.target);
  if (batch.buffer) full(batch.buffer->inputs);
  return sig;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace cidal::checks
