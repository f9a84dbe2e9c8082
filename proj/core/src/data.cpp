#include "cidal/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "cidal/idx.hpp"

namespace cidal {

namespace {

// Shuffles rows and labels together.
void shuffle_rows(Domain& d, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(d.size()));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  d.inputs = gather_rows(d.inputs, perm);
  if (d.labels) d.labels = gather_labels(*d.labels, perm);
}

LabeledSet to_labeled(const Domain& d, std::string name) {
  require(d.labels.has_value(), "domain '" + name + "' has no labels");
  return {std::move(name), d.inputs, *d.labels};
}

void check_labels(const Labels& labels, int k, const std::string& name) {
  for (int y : labels)
    require(y >= 0 && y < k, "domain '" + name + "' has label " + std::to_string(y) + " outside [0, " +
                                 std::to_string(k) + ")");
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& inputs) {
  require(inputs.rows() >= 1, "cannot standardize an empty set");
  Standardizer s;
  s.mean = inputs.colwise().mean().transpose();
  const Matrix centered = inputs.rowwise() - s.mean.transpose();
  const Vector var = centered.colwise().squaredNorm().transpose() / static_cast<double>(inputs.rows());
  s.scale = var.array().sqrt().max(1e-12).inverse().matrix();
  return s;
}

Matrix Standardizer::apply(const Matrix& inputs) const {
  require_shape(inputs.cols() == mean.size(), "standardizer width mismatch");
  Matrix out = inputs.rowwise() - mean.transpose();
  out.array().rowwise() *= scale.transpose().array();
  return out;
}

const LabeledSet& TaskStream::test_set(int domain_id) const {
  require(domain_id >= 0 && domain_id < domain_count(), "domain id out of range");
  return domain_id == 0 ? source_test : targets[static_cast<std::size_t>(domain_id - 1)].test;
}

Domain gen_two_moons(int n, double noise_sigma, double rotation_deg, std::uint64_t seed) {
  require(n >= 2, "two moons needs n >= 2");
  require(noise_sigma >= 0.0, "noise sigma must be non-negative");
  const int n_out = n / 2;
  const int n_in = n - n_out;
  Domain d;
  d.inputs.resize(n, 2);
  d.labels = Labels(static_cast<std::size_t>(n));
  auto angle = [](int i, int count) {
    return count > 1 ? std::numbers::pi * i / (count - 1) : 0.0;
  };
  for (int i = 0; i < n_out; ++i) {
    const double t = angle(i, n_out);
    d.inputs.row(i) << std::cos(t), std::sin(t);
    (*d.labels)[static_cast<std::size_t>(i)] = 0;
  }
  for (int i = 0; i < n_in; ++i) {
    const double t = angle(i, n_in);
    d.inputs.row(n_out + i) << 1.0 - std::cos(t), 0.5 - std::sin(t);
    (*d.labels)[static_cast<std::size_t>(n_out + i)] = 1;
  }

  std::mt19937_64 rng(seed);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Eigen::Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] += noise(rng);
  }

  // Reduce first so that full turns are exact no-ops.
  const double deg = std::fmod(rotation_deg, 360.0);
  if (deg != 0.0) {
    const double r = deg * std::numbers::pi / 180.0;
    Eigen::Matrix2d rot;
    rot << std::cos(r), -std::sin(r), std::sin(r), std::cos(r);
    d.inputs = (d.inputs * rot.transpose()).eval();
  }
  shuffle_rows(d, rng);
  return d;
}

Domain gen_gaussian_blobs(int k, int n, const Matrix& means, double cov_scale, const Vector& shift,
                          std::uint64_t seed) {
  require(k >= 1 && n >= k, "blobs need k >= 1 and n >= k");
  require(means.rows() == k, "blob means must have k rows");
  require(shift.size() == means.cols(), "shift width does not match mean width");
  require(cov_scale >= 0.0, "covariance scale must be non-negative");
  const Eigen::Index dim = means.cols();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(cov_scale);
  Domain d;
  d.inputs.resize(n, dim);
  d.labels = Labels(static_cast<std::size_t>(n));
  int row = 0;
  for (int j = 0; j < k; ++j) {
    const int count = n / k + (j < n % k ? 1 : 0);
    for (int i = 0; i < count; ++i, ++row) {
      for (Eigen::Index c = 0; c < dim; ++c) d.inputs(row, c) = means(j, c) + shift(c) + sd * normal(rng);
      (*d.labels)[static_cast<std::size_t>(row)] = j;
    }
  }
  shuffle_rows(d, rng);
  return d;
}

std::vector<int> class_counts(const Labels& labels, int k) {
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int y : labels) {
    require(y >= 0 && y < k, "label outside [0, k)");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

Domain apply_imbalance(const Domain& domain, int k) {
  require(domain.labels.has_value(), "imbalance needs labels");
  const auto counts = class_counts(*domain.labels, k);
  std::vector<int> keep(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    keep[static_cast<std::size_t>(j)] =
        static_cast<int>((static_cast<long long>(counts[static_cast<std::size_t>(j)]) * (j + 1)) / k);
  std::vector<int> rows;
  std::vector<int> taken(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < domain.size(); ++i) {
    const int y = (*domain.labels)[static_cast<std::size_t>(i)];
    if (taken[static_cast<std::size_t>(y)] < keep[static_cast<std::size_t>(y)]) {
      ++taken[static_cast<std::size_t>(y)];
      rows.push_back(i);
    }
  }
  Domain out = domain;
  out.inputs = gather_rows(domain.inputs, rows);
  out.labels = gather_labels(*domain.labels, rows);
  return out;
}

int StreamConfig::domain_count() const {
  switch (kind) {
    case StreamKind::moons: return static_cast<int>(rotations_deg.size());
    case StreamKind::blobs: return static_cast<int>(blob_shifts.rows());
    case StreamKind::idx: return static_cast<int>(idx_domains.size());
  }
  return 0;
}

StreamConfig default_blob_stream() {
  StreamConfig c;
  c.kind = StreamKind::blobs;
  c.k = 3;
  c.blob_means.resize(3, 2);
  c.blob_means << 0.0, 0.0, 3.0, 0.0, 1.5, 2.6;
  c.blob_shifts.resize(3, 2);
  c.blob_shifts << 0.0, 0.0, 0.0, 1.0, 0.0, 2.0;
  c.cov_scale = 0.25;
  return c;
}

TaskStream make_task_stream(const StreamConfig& config, std::uint64_t seed) {
  const int count = config.domain_count();
  require(count >= 1, "stream needs at least a source domain");
  require(config.n_train >= 2 && config.n_test >= 2, "domains need at least 2 samples");

  int k = 0;
  std::vector<std::pair<Domain, Domain>> domains;  // (train, test)
  for (int i = 0; i < count; ++i) {
    const std::uint64_t train_seed = derive_seed(seed, i, 0);
    const std::uint64_t test_seed = derive_seed(seed, i, 1);
    Domain train, test;
    std::string name;
    switch (config.kind) {
      case StreamKind::moons: {
        k = 2;
        const double rot = config.rotations_deg[static_cast<std::size_t>(i)];
        train = gen_two_moons(config.n_train, config.noise, rot, train_seed);
        test = gen_two_moons(config.n_test, config.noise, rot, test_seed);
        std::ostringstream os;
        os << "moons_" << rot << "deg";
        name = os.str();
        break;
      }
      case StreamKind::blobs: {
        k = config.k;
        require(config.blob_means.rows() == k, "blob means must have k rows");
        require(config.blob_shifts.cols() == config.blob_means.cols(), "blob shift width mismatch");
        const Vector shift = config.blob_shifts.row(i).transpose();
        train = gen_gaussian_blobs(k, config.n_train, config.blob_means, config.cov_scale, shift, train_seed);
        test = gen_gaussian_blobs(k, config.n_test, config.blob_means, config.cov_scale, shift, test_seed);
        name = "blobs_" + std::to_string(i);
        break;
      }
      case StreamKind::idx: {
        k = config.idx_k;
        const auto& f = config.idx_domains[static_cast<std::size_t>(i)];
        train = load_idx(f.train_images, f.train_labels);
        test = load_idx(f.test_images, f.test_labels);
        name = train.name;
        break;
      }
    }
    train.name = test.name = name;
    train.split = Split::train;
    test.split = Split::test;
    check_labels(*train.labels, k, name);
    check_labels(*test.labels, k, name);
    if (config.imbalance) {
      train = apply_imbalance(train, k);
      test = apply_imbalance(test, k);
    }
    domains.emplace_back(std::move(train), std::move(test));
  }

  TaskStream s;
  s.k = k;
  s.d = domains.front().first.width();
  for (const auto& [train, test] : domains) {
    require(train.width() == s.d && test.width() == s.d,
            "domain '" + train.name + "' has width " + std::to_string(train.width()) + ", expected " +
                std::to_string(s.d));
  }
  const auto source_counts = class_counts(*domains.front().first.labels, k);
  for (int j = 0; j < k; ++j)
    require(source_counts[static_cast<std::size_t>(j)] > 0,
            "source domain has no samples of class " + std::to_string(j));

  s.standardizer = Standardizer::fit(domains.front().first.inputs);
  auto standardized = [&](const Domain& d) { return s.standardizer.apply(d.inputs); };
  s.source_train = to_labeled(domains.front().first, domains.front().first.name);
  s.source_train.inputs = standardized(domains.front().first);
  s.source_test = to_labeled(domains.front().second, domains.front().second.name);
  s.source_test.inputs = standardized(domains.front().second);
  for (std::size_t i = 1; i < domains.size(); ++i) {
    const auto& [train, test] = domains[i];
    TargetDomain t;
    t.train = {train.name, standardized(train)};
    t.test = to_labeled(test, test.name);
    t.test.inputs = standardized(test);
    s.targets.push_back(std::move(t));
  }
  return s;
}

}  // namespace cidal
