#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cidal/config.hpp"
#include "cidal/metrics.hpp"
#include "cidal/trainer.hpp"

namespace cidal {

struct RunOptions {
  // Write metrics.csv, checkpoints and curve files under config.output_dir.
  bool write_files = true;
  // Continue from a checkpoint; only epochs after it are recorded.
  std::optional<std::string> resume_from;
  // Receives each completed time step's records (source step included).
  std::function<void(const std::vector<MetricsRecord>&)> on_records;
};

struct RunResult {
  std::vector<MetricsRecord> records;
  TrainerState state;
};

// Source training, then one adaptation step per target. After every epoch
// every domain seen so far is evaluated on its test split.
RunResult run_experiment_full(const ExperimentConfig& config, const RunOptions& options = {});

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Accuracy of each domain at the last recorded epoch.
std::vector<double> final_accuracies(const std::vector<MetricsRecord>& records);

// Accuracy of `domain_id` at the last epoch of `time_step`.
double accuracy_at_end_of(const std::vector<MetricsRecord>& records, int time_step, int domain_id);

struct AblationPoint {
  std::string run_id;
  double tau = 0.0;
  int n_b = 0;
  double final_mean_accuracy = 0.0;
  double task0_drop = 0.0;  // after source training minus final
};

// Runs the tau x n_b grid (a missing sweep uses the configured value) and
// writes ablation_summary.csv alongside per-point run directories.
std::vector<AblationPoint> run_ablation(const ExperimentConfig& config, bool write_files = true);

}  // namespace cidal
