// cidal: run an experiment, an ablation grid, or the numbered checks.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cidal/checks/criteria.hpp"
#include "cidal/config.hpp"
#include "cidal/experiment.hpp"

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

cidal::ExperimentConfig load(const std::string& path, const Common& common) {
  cidal::ExperimentConfig c = cidal::parse_config(path);
  if (common.seed) c.hyper.seed = *common.seed;
  if (common.out) c.output_dir = *common.out;
  return c;
}

int run(const std::string& path, const Common& common, const std::optional<std::string>& resume) {
  const cidal::ExperimentConfig c = load(path, common);
  cidal::RunOptions opts;
  opts.resume_from = resume;
  opts.on_records = [](const std::vector<cidal::MetricsRecord>& rs) {
    if (rs.empty()) return;
    const int t = rs.back().time_step;
    std::cout << "time step " << t << ":";
    for (const auto& r : rs)
      if (r.epoch == rs.back().epoch) std::cout << " d" << r.domain_id << "=" << r.accuracy;
    std::cout << '\n' << std::flush;
  };
  const auto records = cidal::run_experiment(c, opts);
  std::cout << "wrote " << records.size() << " rows to " << (std::filesystem::path(c.output_dir) / "metrics.csv").string()
            << '\n';
  return 0;
}

int ablate(const std::string& path, const Common& common) {
  const cidal::ExperimentConfig c = load(path, common);
  const auto points = cidal::run_ablation(c);
  for (const auto& p : points)
    std::cout << p.run_id << ": final mean " << p.final_mean_accuracy << ", task 0 drop " << p.task0_drop << '\n';
  std::cout << "summary: " << (std::filesystem::path(c.output_dir) / "ablation_summary.csv").string() << '\n';
  return 0;
}

int check(const Common& common, bool full, const std::vector<int>& only) {
  const std::uint64_t seed = common.seed.value_or(0);
  std::ofstream report;
  if (common.out) {
    std::filesystem::create_directories(*common.out);
    report.open(std::filesystem::path(*common.out) / "checks.txt");
  }
  int failed = 0, ran = 0;
  for (const auto& spec : cidal::checks::all_checks()) {
    if (!only.empty()) {
      if (std::find(only.begin(), only.end(), spec.id) == only.end()) continue;
    } else if (spec.slow && !full) {
      continue;
    }
    const auto line = cidal::checks::format_result(cidal::checks::run_check(spec, seed));
    std::cout << line << '\n' << std::flush;
    if (report.is_open()) report << line << '\n';
    if (line.rfind("PASS", 0) != 0) ++failed;
    ++ran;
  }
  std::cout << (ran - failed) << " of " << ran << " checks passed";
  if (!full && only.empty()) std::cout << " (slow checks skipped; use --full)";
  std::cout << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual domain adaptation with an internal distribution and replay"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Override the configured seed");
    sub->add_option("--out", common.out, "Output directory");
  };

  std::string config_path;
  std::optional<std::string> resume;
  auto* run_cmd = app.add_subcommand("run", "Train on a task stream and write metrics");
  run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  add_common(run_cmd);

  auto* ablate_cmd = app.add_subcommand("ablate", "Run the tau x n_b grid from a config");
  ablate_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_common(ablate_cmd);

  bool full = false;
  std::vector<int> only;
  auto* check_cmd = app.add_subcommand("check", "Run the numbered acceptance checks");
  check_cmd->add_flag("--full", full, "Include the checks that train whole streams");
  check_cmd->add_option("--only", only, "Run just these check ids");
  add_common(check_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, common, resume);
    if (*ablate_cmd) return ablate(config_path, common);
    return check(common, full, only);
  } catch (const cidal::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
