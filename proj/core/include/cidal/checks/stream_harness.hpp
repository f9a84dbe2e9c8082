#pragma once

// Runs a whole task stream through the trainer and evaluates every domain
// (seen or not) after each time step. Used by the comparative experiments.

#include <vector>

#include "cidal/config.hpp"
#include "cidal/trainer.hpp"

namespace cidal::checks {

struct StreamOutcome {
  // accuracy[s][d]: domain d after time step s (s = 0 is source training).
  std::vector<std::vector<double>> accuracy;
  std::vector<EpochLog> history;

  int steps() const { return static_cast<int>(accuracy.size()); }
  double forgetting_task0() const { return accuracy.front().front() - accuracy.back().front(); }
  double final_mean() const;
};

StreamOutcome run_stream(const ExperimentConfig& config);

// Moons stream [0, 30, 60] degrees with the settings the comparative
// experiments share.
ExperimentConfig moons_config(std::uint64_t seed, double lambda, int n_b, bool imbalance = false);
ExperimentConfig blobs_config(std::uint64_t seed, double lambda, int n_b);

}  // namespace cidal::checks
