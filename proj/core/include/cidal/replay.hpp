#pragma once

// Experience-replay memory. Each task contributes up to N_b samples, chosen
// per class as those whose embedding lies closest to the class mean.

#include <cstdint>
#include <span>
#include <vector>

#include "cidal/common.hpp"

namespace cidal {

struct BufferEntry {
  Vector input;
  int pseudo_label = 0;
  int source_task = 0;
  double distance_to_mean = 0.0;  // squared Euclidean, embedding space
};

// Per-class budgets for one task: floor(n_b / k) each, with the remainder
// handed one apiece to the classes with the most candidates (lower class id
// wins ties).
std::vector<int> class_budgets(int n_b, int k, std::span<const int> candidate_counts);

// For each class j, the budget[j] rows labeled j with the smallest
// ||means_j - embedding||^2, ties broken by row index. Entries are returned
// grouped by class, ascending distance within a class.
std::vector<BufferEntry> select_mof(const Matrix& inputs, const Matrix& embeddings, std::span<const int> labels,
                                    const Matrix& means, std::span<const int> budget, int task_id = 0);

// Same with a uniform per-class budget.
std::vector<BufferEntry> select_mof(const Matrix& inputs, const Matrix& embeddings, std::span<const int> labels,
                                    const Matrix& means, int per_class_budget, int task_id = 0);

struct ReplayBatch {
  Matrix inputs;
  Labels labels;
};

class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(int per_task_budget, int class_count);

  int per_task_budget() const { return per_task_budget_; }
  int class_count() const { return class_count_; }
  // floor(N_b / k); a class may receive one extra slot from the remainder.
  int per_class_budget() const { return class_count_ > 0 ? per_task_budget_ / class_count_ : 0; }

  // Union with entries tagged `task_id`. Throws ValidationError when the
  // task's contribution would exceed N_b in total, ceil(N_b / k) for a class,
  // or carries a label outside [0, k).
  void append(std::vector<BufferEntry> new_entries, int task_id);

  // m draws: without replacement when m <= size, otherwise with replacement.
  ReplayBatch sample_batch(int m, std::uint64_t seed) const;

  const std::vector<BufferEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Matrix inputs() const;
  Labels labels() const;

 private:
  int per_task_budget_ = 0;
  int class_count_ = 0;
  std::vector<BufferEntry> entries_;
};

}  // namespace cidal
