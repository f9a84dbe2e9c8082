#include "cidal/replay.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace cidal {

std::vector<int> class_budgets(int n_b, int k, std::span<const int> candidate_counts) {
  require(n_b >= 0, "buffer budget must be non-negative");
  require(k >= 1, "class count must be >= 1");
  require(static_cast<int>(candidate_counts.size()) == k, "candidate counts must have one entry per class");
  std::vector<int> budget(static_cast<std::size_t>(k), n_b / k);
  int remainder = n_b % k;
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidate_counts[static_cast<std::size_t>(a)] > candidate_counts[static_cast<std::size_t>(b)];
  });
  for (int j : order) {
    if (remainder == 0) break;
    ++budget[static_cast<std::size_t>(j)];
    --remainder;
  }
  return budget;
}

std::vector<BufferEntry> select_mof(const Matrix& inputs, const Matrix& embeddings, std::span<const int> labels,
                                    const Matrix& means, std::span<const int> budget, int task_id) {
  require_shape(inputs.rows() == embeddings.rows() && static_cast<Eigen::Index>(labels.size()) == inputs.rows(),
                "inputs, embeddings and labels must align");
  require_shape(means.cols() == embeddings.cols(), "mean width does not match embedding width");
  const int k = static_cast<int>(means.rows());
  require(static_cast<int>(budget.size()) == k, "budget must have one entry per class (k = " + std::to_string(k) + ")");

  std::vector<std::vector<std::pair<double, int>>> per_class(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    require(y >= 0 && y < k, "label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    const double d = (means.row(y) - embeddings.row(static_cast<Eigen::Index>(i))).squaredNorm();
    per_class[static_cast<std::size_t>(y)].emplace_back(d, static_cast<int>(i));
  }

  std::vector<BufferEntry> out;
  for (int j = 0; j < k; ++j) {
    auto& cand = per_class[static_cast<std::size_t>(j)];
    const int b = budget[static_cast<std::size_t>(j)];
    require(b >= 0, "negative class budget");
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(b), cand.size());
    // pair ordering is (distance, index): exactly the tie rule.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) {
      const auto [d, row] = cand[i];
      out.push_back({inputs.row(row).transpose(), j, task_id, d});
    }
  }
  return out;
}

std::vector<BufferEntry> select_mof(const Matrix& inputs, const Matrix& embeddings, std::span<const int> labels,
                                    const Matrix& means, int per_class_budget, int task_id) {
  const std::vector<int> budget(static_cast<std::size_t>(means.rows()), per_class_budget);
  return select_mof(inputs, embeddings, labels, means, budget, task_id);
}

ReplayBuffer::ReplayBuffer(int per_task_budget, int class_count)
    : per_task_budget_(per_task_budget), class_count_(class_count) {
  require(per_task_budget >= 0, "buffer budget must be non-negative");
  require(class_count >= 1, "class count must be >= 1");
}

void ReplayBuffer::append(std::vector<BufferEntry> new_entries, int task_id) {
  const int class_cap = (per_task_budget_ + class_count_ - 1) / std::max(class_count_, 1);
  std::map<int, int> per_class;
  int task_total = 0;
  for (const BufferEntry& e : entries_) {
    if (e.source_task != task_id) continue;
    ++per_class[e.pseudo_label];
    ++task_total;
  }
  for (BufferEntry& e : new_entries) {
    require(e.pseudo_label >= 0 && e.pseudo_label < class_count_, "buffer label outside [0, k)");
    require(e.distance_to_mean >= 0.0, "negative distance to mean");
    require(entries_.empty() || e.input.size() == entries_.front().input.size(), "buffer input width mismatch");
    e.source_task = task_id;
    ++task_total;
    require(++per_class[e.pseudo_label] <= class_cap,
            "class " + std::to_string(e.pseudo_label) + " exceeds its per-task budget for task " +
                std::to_string(task_id));
  }
  require(task_total <= per_task_budget_,
          "task " + std::to_string(task_id) + " exceeds buffer budget " + std::to_string(per_task_budget_));
  entries_.insert(entries_.end(), std::make_move_iterator(new_entries.begin()),
                  std::make_move_iterator(new_entries.end()));
}

ReplayBatch ReplayBuffer::sample_batch(int m, std::uint64_t seed) const {
  require(!entries_.empty(), "cannot sample from an empty buffer");
  require(m >= 1, "batch size must be >= 1");
  const int n = static_cast<int>(entries_.size());
  std::mt19937_64 rng(seed);
  std::vector<int> picks;
  if (m <= n) {
    picks.resize(static_cast<std::size_t>(n));
    std::iota(picks.begin(), picks.end(), 0);
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(picks[static_cast<std::size_t>(i)], picks[static_cast<std::size_t>(pick(rng))]);
    }
    picks.resize(static_cast<std::size_t>(m));
  } else {
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < m; ++i) picks.push_back(pick(rng));
  }
  ReplayBatch batch{Matrix(m, entries_.front().input.size()), Labels(static_cast<std::size_t>(m))};
  for (int i = 0; i < m; ++i) {
    const BufferEntry& e = entries_[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
    batch.inputs.row(i) = e.input.transpose();
    batch.labels[static_cast<std::size_t>(i)] = e.pseudo_label;
  }
  return batch;
}

Matrix ReplayBuffer::inputs() const {
  Matrix m(static_cast<Eigen::Index>(entries_.size()), entries_.empty() ? 0 : entries_.front().input.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = entries_[i].input.transpose();
  return m;
}

Labels ReplayBuffer::labels() const {
  Labels l;
  l.reserve(entries_.size());
  for (const auto& e : entries_) l.push_back(e.pseudo_label);
  return l;
}

}  // namespace cidal
