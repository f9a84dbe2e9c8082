#pragma once

// Domains and task streams: one labeled source domain followed by an ordered
// list of target domains whose training splits carry no labels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cidal/common.hpp"

namespace cidal {

enum class Split { train, test };

struct Domain {
  std::string name;
  Matrix inputs;
  std::optional<Labels> labels;
  Split split = Split::train;

  int size() const { return static_cast<int>(inputs.rows()); }
  int width() const { return static_cast<int>(inputs.cols()); }
};

// Unlabeled training split of a target domain. There is no label channel.
struct UnlabeledSet {
  std::string name;
  Matrix inputs;

  int size() const { return static_cast<int>(inputs.rows()); }
};

struct LabeledSet {
  std::string name;
  Matrix inputs;
  Labels labels;

  int size() const { return static_cast<int>(inputs.rows()); }
};

struct TargetDomain {
  UnlabeledSet train;
  LabeledSet test;  // evaluation only
};

// Per-feature affine map fitted on the source training inputs.
struct Standardizer {
  Vector mean;
  Vector scale;  // 1 / std, with std floored at 1e-12

  static Standardizer fit(const Matrix& inputs);
  Matrix apply(const Matrix& inputs) const;
};

struct TaskStream {
  LabeledSet source_train;
  LabeledSet source_test;
  std::vector<TargetDomain> targets;
  int k = 0;
  int d = 0;
  Standardizer standardizer;

  // Domain 0 is the source; domain t >= 1 is targets[t - 1].
  int domain_count() const { return 1 + static_cast<int>(targets.size()); }
  const LabeledSet& test_set(int domain_id) const;
};

// Two interleaving half circles (outer: label 0, inner: label 1) with
// isotropic noise, rotated about the origin. Rows are shuffled.
Domain gen_two_moons(int n, double noise_sigma, double rotation_deg, std::uint64_t seed);

// n points split evenly over k classes (remainder to the lowest ids), class j
// drawn from N(means_j + shift, cov_scale * I). Rows are shuffled.
Domain gen_gaussian_blobs(int k, int n, const Matrix& means, double cov_scale, const Vector& shift,
                          std::uint64_t seed);

// Keeps floor(count_i * (i + 1) / k) samples of class i, in row order.
Domain apply_imbalance(const Domain& domain, int k);

// Sample count per class.
std::vector<int> class_counts(const Labels& labels, int k);

enum class StreamKind { moons, blobs, idx };

struct IdxDomainFiles {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
};

struct StreamConfig {
  StreamKind kind = StreamKind::moons;
  int n_train = 500;  // per domain
  int n_test = 500;
  bool imbalance = false;

  // moons: one domain per rotation, in declaration order.
  std::vector<double> rotations_deg{0.0, 30.0, 60.0};
  double noise = 0.1;

  // blobs: one domain per shift row, in declaration order.
  int k = 3;
  Matrix blob_means;   // k x d
  Matrix blob_shifts;  // domains x d
  double cov_scale = 0.25;

  // idx: one domain per entry. Images must share a size.
  std::vector<IdxDomainFiles> idx_domains;
  int idx_k = 10;

  int domain_count() const;
};

StreamConfig default_blob_stream();

// Builds domains in declared order, standardizes every domain with the source
// training statistics and drops the labels of target training splits.
TaskStream make_task_stream(const StreamConfig& config, std::uint64_t seed);

}  // namespace cidal
