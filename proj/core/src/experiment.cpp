#include "cidal/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "cidal/checkpoint.hpp"

namespace cidal {

namespace {

constexpr std::uint64_t kModelInitTag = 0x6d6f64656cULL;

template <typename F>
void with_context(const std::string& context, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(context + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(context + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  }
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

RunResult run_experiment_full(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const HyperParams hyper = config.effective_hyper();
  const TaskStream stream = make_task_stream(config.stream, hyper.seed);

  RunResult result;
  TrainerState& state = result.state;
  if (options.resume_from) {
    state = load_checkpoint(*options.resume_from);
    require(state.model.input_width() == stream.d && state.model.class_count() == stream.k,
            "checkpoint model does not fit the configured stream");
    require(state.time_step <= stream.domain_count(), "checkpoint is past the end of the stream");
  } else {
    Architecture arch = config.arch;
    arch.input_width = stream.d;
    arch.class_count = stream.k;
    state = make_trainer_state(make_model(arch, derive_seed(hyper.seed, kModelInitTag)), hyper);
  }

  std::filesystem::path out_dir(config.output_dir);
  std::ofstream metrics;
  if (options.write_files) {
    std::filesystem::create_directories(out_dir);
    const auto path = (out_dir / "metrics.csv").string();
    metrics.open(path, std::ios::binary);
    if (!metrics) throw IoError("cannot write metrics to '" + path + "'");
    metrics << kMetricsHeader << '\n';
  }

  std::vector<MetricsRecord> pending;
  const EpochObserver observer = [&](const TrainerState& s, const EpochLog& log) {
    for (int d = 0; d <= log.time_step; ++d) {
      MetricsRecord r;
      r.run_id = config.run_id;
      r.seed = hyper.seed;
      r.time_step = log.time_step;
      r.epoch = log.epoch;
      r.domain_id = d;
      r.accuracy = evaluate(s.model, stream.test_set(d));
      r.loss_total = log.loss_total;
      r.loss_ce_pseudo = log.loss_ce_pseudo;
      r.loss_ce_buffer = log.loss_ce_buffer;
      r.loss_swd_target = log.loss_swd_target;
      r.loss_swd_buffer = log.loss_swd_buffer;
      r.swd_current = log.swd_current;
      pending.push_back(r);
    }
  };

  // Drift is only known once the step's refit is done.
  auto finish_step = [&](int time_step) {
    std::map<int, double> drift;
    for (const EpochLog& log : state.history)
      if (log.time_step == time_step) drift[log.epoch] = log.swd_gmm_drift;
    for (MetricsRecord& r : pending) r.swd_gmm_drift = drift.count(r.epoch) ? drift[r.epoch] : 0.0;
    if (metrics.is_open()) {
      write_metrics_rows(metrics, pending);
      metrics.flush();
      if (!metrics) throw IoError("write failed for metrics.csv in '" + out_dir.string() + "'");
    }
    if (options.write_files)
      save_checkpoint((out_dir / ("checkpoint_step" + std::to_string(time_step) + ".ckpt")).string(), state);
    if (options.on_records) options.on_records(pending);
    result.records.insert(result.records.end(), pending.begin(), pending.end());
    pending.clear();
  };

  const std::string ctx = "run '" + config.run_id + "' (seed " + std::to_string(hyper.seed) + ")";
  if (state.time_step == 0) {
    with_context(ctx + " source step", [&] { train_source(state, stream.source_train, hyper, observer); });
    finish_step(0);
  }
  while (state.time_step < stream.domain_count()) {
    const int t = state.time_step;
    with_context(ctx + " time step " + std::to_string(t),
                 [&] { run_time_step(state, stream.targets[static_cast<std::size_t>(t - 1)].train, hyper, observer); });
    finish_step(t);
  }

  if (options.write_files && !result.records.empty()) emit_learning_curves(result.records, out_dir.string());
  return result;
}

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment_full(config, options).records;
}

std::vector<double> final_accuracies(const std::vector<MetricsRecord>& records) {
  std::map<int, double> last;
  for (const auto& r : records) last[r.domain_id] = r.accuracy;
  std::vector<double> out;
  for (const auto& [d, acc] : last) out.push_back(acc);
  return out;
}

double accuracy_at_end_of(const std::vector<MetricsRecord>& records, int time_step, int domain_id) {
  const MetricsRecord* found = nullptr;
  for (const auto& r : records)
    if (r.time_step == time_step && r.domain_id == domain_id) found = &r;
  require(found != nullptr, "no record for domain " + std::to_string(domain_id) + " at time step " +
                                std::to_string(time_step));
  return found->accuracy;
}

std::vector<AblationPoint> run_ablation(const ExperimentConfig& config, bool write_files) {
  const std::vector<double> taus = config.tau_sweep.empty() ? std::vector<double>{config.hyper.tau} : config.tau_sweep;
  const std::vector<int> nbs = config.n_b_sweep.empty() ? std::vector<int>{config.hyper.n_b} : config.n_b_sweep;

  std::vector<AblationPoint> points;
  for (double tau : taus) {
    for (int n_b : nbs) {
      ExperimentConfig point = config;
      point.hyper.tau = tau;
      point.hyper.n_b = n_b;
      point.run_id = config.run_id + "_tau" + format_real(tau) + "_nb" + std::to_string(n_b);
      point.output_dir = (std::filesystem::path(config.output_dir) / point.run_id).string();
      RunOptions opts;
      opts.write_files = write_files;
      const auto records = run_experiment(point, opts);
      const auto finals = final_accuracies(records);
      double mean = 0.0;
      for (double a : finals) mean += a;
      mean /= static_cast<double>(finals.size());
      points.push_back({point.run_id, tau, point.effective_hyper().n_b, mean,
                        accuracy_at_end_of(records, 0, 0) - finals.front()});
    }
  }

  if (write_files) {
    std::filesystem::create_directories(config.output_dir);
    const auto path = (std::filesystem::path(config.output_dir) / "ablation_summary.csv").string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path + "'");
    os << "run_id,tau,n_b,final_mean_accuracy,task0_drop\n";
    for (const auto& p : points) {
      char buf[128];
      std::snprintf(buf, sizeof buf, ",%.9g,%d,%.9g,%.9g\n", p.tau, p.n_b, p.final_mean_accuracy, p.task0_drop);
      os << p.run_id << buf;
    }
  }
  return points;
}

}  // namespace cidal
