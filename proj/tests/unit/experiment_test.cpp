#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cidal/experiment.hpp"

using namespace cidal;

namespace {

ExperimentConfig quick(int domains = 3) {
  ExperimentConfig c;
  c.stream.rotations_deg.resize(static_cast<std::size_t>(domains));
  for (int i = 0; i < domains; ++i) c.stream.rotations_deg[static_cast<std::size_t>(i)] = 20.0 * i;
  c.stream.n_train = c.stream.n_test = 60;
  c.hyper.epochs_source = 6;
  c.hyper.epochs_adapt = 2;
  c.hyper.tau = 0.6;
  c.hyper.seed = 9;
  c.run_id = "quick";
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cidal_exp_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Experiment, SourceOnlyStream) {
  RunOptions opts;
  opts.write_files = false;
  const auto records = run_experiment(quick(1), opts);
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) {
    EXPECT_EQ(r.time_step, 0);
    EXPECT_EQ(r.domain_id, 0);
    EXPECT_EQ(r.swd_gmm_drift, 0.0);
  }
}

TEST(Experiment, RecordCountsAndFiles) {
  ExperimentConfig c = quick();
  const auto dir = temp_dir("files");
  c.output_dir = dir.string();
  int calls = 0;
  RunOptions opts;
  opts.on_records = [&](const std::vector<MetricsRecord>&) { ++calls; };
  const auto records = run_experiment(c, opts);
  // 6 source epochs x 1 domain, then 2 epochs x 2 and x 3 domains.
  EXPECT_EQ(records.size(), 6u + 4u + 6u);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(read_metrics_csv((dir / "metrics.csv").string()).size(), records.size());
  for (int t = 0; t < 3; ++t) EXPECT_TRUE(std::filesystem::exists(dir / ("checkpoint_step" + std::to_string(t) + ".ckpt")));
  for (int d = 0; d < 3; ++d) EXPECT_TRUE(std::filesystem::exists(dir / ("curve_domain" + std::to_string(d) + ".csv")));
  EXPECT_EQ(final_accuracies(records).size(), 3u);
  EXPECT_EQ(accuracy_at_end_of(records, 0, 0), records[5].accuracy);
  EXPECT_THROW(accuracy_at_end_of(records, 0, 2), ValidationError);
}

TEST(Experiment, SameSeedSameBytes) {
  ExperimentConfig a = quick(), b = quick();
  a.output_dir = temp_dir("det_a").string();
  b.output_dir = temp_dir("det_b").string();
  run_experiment(a);
  run_experiment(b);
  EXPECT_EQ(slurp(std::filesystem::path(a.output_dir) / "metrics.csv"),
            slurp(std::filesystem::path(b.output_dir) / "metrics.csv"));
}

TEST(Experiment, AblationFlagsMatchNaiveSettings) {
  RunOptions opts;
  opts.write_files = false;
  ExperimentConfig flags = quick();
  flags.disable_buffer = true;
  flags.lambda_override = 0.0;
  ExperimentConfig naive = quick();
  naive.hyper.n_b = 0;
  naive.hyper.lambda = 0.0;
  const auto a = run_experiment(flags, opts), b = run_experiment(naive, opts);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(format_metrics_row(a[i]), format_metrics_row(b[i]));
}

TEST(Experiment, AblationGridSummary) {
  ExperimentConfig c = quick(2);
  c.tau_sweep = {0.5, 0.7};
  c.n_b_sweep = {0, 4};
  const auto dir = temp_dir("ablate");
  c.output_dir = dir.string();
  const auto points = run_ablation(c);
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[1].run_id, "quick_tau0.5_nb4");
  EXPECT_EQ(points[2].tau, 0.7);
  for (const auto& p : points) {
    EXPECT_GE(p.final_mean_accuracy, 0.0);
    EXPECT_LE(p.final_mean_accuracy, 1.0);
    EXPECT_TRUE(std::filesystem::exists(dir / p.run_id / "metrics.csv"));
  }
  std::istringstream summary(slurp(dir / "ablation_summary.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(summary, line)) ++lines;
  EXPECT_EQ(lines, 5);
}

TEST(Experiment, ErrorsNameTheStep) {
  ExperimentConfig c = quick();
  c.hyper.tau = 0.999999999;
  RunOptions opts;
  opts.write_files = false;
  try {
    run_experiment(c, opts);
    FAIL() << "expected a failure";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("time step 1"), std::string::npos) << e.what();
  }
}
