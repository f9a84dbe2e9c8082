#include "cidal/checks/stream_harness.hpp"

#include <numeric>

namespace cidal::checks {

double StreamOutcome::final_mean() const {
  const auto& last = accuracy.back();
  return std::accumulate(last.begin(), last.end(), 0.0) / static_cast<double>(last.size());
}

StreamOutcome run_stream(const ExperimentConfig& config) {
  const HyperParams hyper = config.effective_hyper();
  const TaskStream stream = make_task_stream(config.stream, hyper.seed);
  Architecture arch = config.arch;
  arch.input_width = stream.d;
  arch.class_count = stream.k;
  TrainerState state = make_trainer_state(make_model(arch, derive_seed(hyper.seed, 0x6d6f64656cULL)), hyper);

  StreamOutcome out;
  auto snapshot = [&] {
    std::vector<double> row;
    for (int d = 0; d < stream.domain_count(); ++d) row.push_back(evaluate(state.model, stream.test_set(d)));
    out.accuracy.push_back(std::move(row));
  };
  train_source(state, stream.source_train, hyper);
  snapshot();
  for (const auto& target : stream.targets) {
    run_time_step(state, target.train, hyper);
    snapshot();
  }
  out.history = state.history;
  return out;
}

ExperimentConfig moons_config(std::uint64_t seed, double lambda, int n_b, bool imbalance) {
  ExperimentConfig c;
  c.stream.kind = StreamKind::moons;
  c.stream.rotations_deg = {0.0, 30.0, 60.0};
  c.stream.n_train = 500;
  c.stream.n_test = 500;
  c.stream.imbalance = imbalance;
  c.hyper.seed = seed;
  c.hyper.lambda = lambda;
  c.hyper.tau = 0.9;
  c.hyper.n_b = n_b;
  return c;
}

ExperimentConfig blobs_config(std::uint64_t seed, double lambda, int n_b) {
  ExperimentConfig c = moons_config(seed, lambda, n_b);
  const StreamConfig blobs = default_blob_stream();
  c.stream = blobs;
  c.stream.n_train = 500;
  c.stream.n_test = 500;
  return c;
}

}  // namespace cidal::checks
