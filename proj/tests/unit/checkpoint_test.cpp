#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cidal/checkpoint.hpp"
#include "cidal/checks/oracles.hpp"
#include "cidal/experiment.hpp"

using namespace cidal;

namespace {

TrainerState adapted_state() {
  Matrix means(2, 2);
  means << -2, 0, 2, 0;
  const Domain src = gen_gaussian_blobs(2, 80, means, 0.25, Vector::Zero(2), 1);
  HyperParams h;
  h.epochs_source = 5;
  h.epochs_adapt = 2;
  h.n_b = 4;
  h.tau = 0.5;
  Architecture a;
  a.encoder_widths = {6, 3};
  TrainerState s = make_trainer_state(make_model(a, 2), h);
  train_source(s, {"s", src.inputs, *src.labels}, h);
  Vector shift(2);
  shift << 0.3, 0.3;
  run_time_step(s, {"t", gen_gaussian_blobs(2, 60, means, 0.25, shift, 2).inputs}, h);
  return s;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const TrainerState s = adapted_state();
  std::stringstream ss;
  write_checkpoint(ss, s);
  const TrainerState back = read_checkpoint(ss);
  EXPECT_EQ(back.time_step, s.time_step);
  EXPECT_EQ(checks::flatten(back.model), checks::flatten(s.model));
  EXPECT_EQ(back.gmm.weights, s.gmm.weights);
  EXPECT_EQ(back.gmm.means, s.gmm.means);
  for (int j = 0; j < s.gmm.k; ++j) EXPECT_EQ(back.gmm.covariances[j], s.gmm.covariances[j]);
  EXPECT_EQ(back.gmm.reg_epsilon, s.gmm.reg_epsilon);
  ASSERT_EQ(back.buffer.size(), s.buffer.size());
  for (std::size_t i = 0; i < s.buffer.size(); ++i) {
    EXPECT_EQ(back.buffer.entries()[i].input, s.buffer.entries()[i].input);
    EXPECT_EQ(back.buffer.entries()[i].pseudo_label, s.buffer.entries()[i].pseudo_label);
    EXPECT_EQ(back.buffer.entries()[i].source_task, s.buffer.entries()[i].source_task);
    EXPECT_EQ(back.buffer.entries()[i].distance_to_mean, s.buffer.entries()[i].distance_to_mean);
  }
  EXPECT_EQ(back.buffer.per_task_budget(), 4);
  EXPECT_TRUE(back.history.empty());
}

TEST(Checkpoint, ModelFile) {
  const TrainerState s = adapted_state();
  const auto path = (std::filesystem::temp_directory_path() / "cidal_model.ckpt").string();
  save_model(path, s.model);
  EXPECT_EQ(checks::flatten(load_model(path)), checks::flatten(s.model));
}

TEST(Checkpoint, BadMagicRejected) {
  std::istringstream bad("not-a-checkpoint 1\n");
  EXPECT_THROW(read_checkpoint(bad), ParseError);
  std::istringstream future(std::string(kCheckpointMagic) + " 99\n");
  EXPECT_THROW(read_checkpoint(future), ParseError);
  std::istringstream cut(std::string(kCheckpointMagic) + " 1\ntime_step 1\nmodel 1 1\n");
  EXPECT_THROW(read_checkpoint(cut), ParseError);
  EXPECT_THROW(load_checkpoint("/nonexistent/cidal.ckpt"), IoError);
}

TEST(Checkpoint, ResumeReproducesTheRun) {
  ExperimentConfig c;
  c.stream.n_train = c.stream.n_test = 60;
  c.hyper.epochs_source = 10;
  c.hyper.epochs_adapt = 2;
  c.hyper.seed = 4;
  c.hyper.tau = 0.6;
  const auto dir = std::filesystem::temp_directory_path() / "cidal_resume";
  std::filesystem::remove_all(dir);
  c.output_dir = dir.string();
  const auto full = run_experiment(c);

  ExperimentConfig resumed = c;
  resumed.output_dir = (dir / "resumed").string();
  RunOptions opts;
  opts.resume_from = (dir / "checkpoint_step1.ckpt").string();
  const auto tail = run_experiment(resumed, opts);

  std::vector<MetricsRecord> expected;
  for (const auto& r : full)
    if (r.time_step == 2) expected.push_back(r);
  ASSERT_EQ(tail.size(), expected.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    EXPECT_EQ(format_metrics_row(tail[i]), format_metrics_row(expected[i]));
  }
}
