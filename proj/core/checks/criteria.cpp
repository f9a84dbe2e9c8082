#include "cidal/checks/criteria.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cidal/checks/oracles.hpp"
#include "cidal/checks/stream_harness.hpp"
#include "cidal/experiment.hpp"
#include "cidal/gmm.hpp"
#include "cidal/replay.hpp"
#include "cidal/swd.hpp"
#include "cidal/trainer.hpp"

namespace cidal::checks {

namespace {

constexpr int kSeeds = 5;

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

CheckResult swd_oracle(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 1));
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 1, kExactWassersteinMaxPoints);
    const Matrix a = normal_matrix(n, 1, rng, 3.0);
    const Matrix b = normal_matrix(n, 1, rng, 3.0);
    const double closed = wasserstein1d_sq({a.data(), static_cast<std::size_t>(n)},
                                           {b.data(), static_cast<std::size_t>(n)}) / n;
    worst = std::max(worst, std::abs(closed - exact_wasserstein_sq_small(a, b)));
  }
  return {1, "", worst <= 1e-9, fmt("200 instances, max |diff| = %.3g (tol 1e-9)", worst)};
}

CheckResult sliced_below_exact(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 2));
  const int trials = 1000;
  const int L = kDefaultProjections;
  const double slack = 3.0 / std::sqrt(static_cast<double>(L));
  int ok = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = uniform_int(rng, 1, 6);
    const Matrix x = normal_matrix(n, 2, rng);
    const Matrix y = normal_matrix(n, 2, rng) + Matrix::Constant(n, 2, 0.5);
    const ProjectionSet proj = sample_projections(2, L, derive_seed(seed, 2, trial));
    const double sw = std::sqrt(sliced_wasserstein_sq(x, y, proj, {true}));
    const double w = std::sqrt(assignment_w2_sq(x, y));
    ok += sw <= w + slack ? 1 : 0;
  }
  const double rate = static_cast<double>(ok) / trials;
  return {2, "", rate >= 0.95, fmt("%d/%d trials within slack %.3g (need 95%%)", ok, trials, slack)};
}

CheckResult loss_gradient(std::uint64_t seed) {
  const int probes = 100;
  const double h = 1e-5;
  int ok = 0;
  int redrawn = 0;
  double worst = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    std::mt19937_64 rng(derive_seed(seed, 3, probe));
    Architecture arch;  // 2-16-8-2
    const ModelParams model = make_model(arch, derive_seed(seed, 3, probe, 1));
    const int m = 8;
    AdaptationBatch batch;
    batch.target = normal_matrix(m, 2, rng);
    batch.pseudo_z = normal_matrix(m, 8, rng);
    for (int i = 0; i < m; ++i) batch.pseudo_labels.push_back(uniform_int(rng, 0, 1));
    ReplayBatch replay{normal_matrix(m, 2, rng), {}};
    for (int i = 0; i < m; ++i) replay.labels.push_back(uniform_int(rng, 0, 1));
    batch.buffer = replay;
    batch.gmm_samples = normal_matrix(m, 8, rng);
    const ProjectionSet proj = sample_projections(8, kDefaultProjections, derive_seed(seed, 3, probe, 2));

    const AdaptationLoss loss = adaptation_loss(model, batch, proj, 1.0);
    const auto theta = flatten(model);
    const auto grad = flatten(loss.grads);
    const auto signature = piecewise_signature(model, batch, proj);

    // A direction whose stencil crosses a relu kink or a sort swap has no
    // derivative to compare against; draw another.
    std::vector<double> dir;
    ModelParams plus, minus;
    for (int draw = 0;; ++draw) {
      dir = random_direction(theta.size(), derive_seed(seed, 3, probe, 3, draw));
      auto moved = [&](double step) {
        std::vector<double> v = theta;
        for (std::size_t i = 0; i < dir.size(); ++i) v[i] += step * dir[i];
        return unflatten(model, v);
      };
      plus = moved(h);
      minus = moved(-h);
      if (piecewise_signature(plus, batch, proj) == signature && piecewise_signature(minus, batch, proj) == signature)
        break;
      ++redrawn;
    }
    double analytic = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) analytic += grad[i] * dir[i];
    const double numeric =
        (adaptation_loss(plus, batch, proj, 1.0).total - adaptation_loss(minus, batch, proj, 1.0).total) / (2.0 * h);
    const double err = relative_error(analytic, numeric);
    worst = std::max(worst, err);
    ok += err < 1e-4 ? 1 : 0;
  }
  return {3, "", ok == probes,
          fmt("%d/%d probes, max rel err = %.3g (tol 1e-4, h 1e-5), %d directions redrawn at kinks", ok, probes, worst,
              redrawn)};
}

CheckResult gmm_map(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 4));
  double worst = 0.0;
  for (int set = 0; set < 50; ++set) {
    const int k = uniform_int(rng, 1, 4);
    const int p = uniform_int(rng, 1, 5);
    const int n = uniform_int(rng, k, 60);
    const Matrix emb = normal_matrix(n, p, rng, 2.0);
    Labels labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < k ? i : uniform_int(rng, 0, k - 1);

    const GmmState g = fit_map(emb, labels, k);
    const DirectMoments d = direct_map_moments(emb, labels, k);
    for (int j = 0; j < k; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      worst = std::max(worst, std::abs(g.weights(j) - d.weights[jj]));
      for (int a = 0; a < p; ++a) {
        worst = std::max(worst, std::abs(g.means(j, a) - d.means[jj][static_cast<std::size_t>(a)]));
        for (int b = 0; b < p; ++b)
          worst = std::max(worst, std::abs(g.covariances[jj](a, b) -
                                           d.covariances[jj][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]));
      }
    }
  }
  return {4, "", worst <= 1e-12, fmt("50 labeled sets, max |diff| = %.3g (tol 1e-12)", worst)};
}

CheckResult mof_selection(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 5));
  int agree = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = uniform_int(rng, 1, 100);
    const int k = uniform_int(rng, 1, 5);
    const int p = uniform_int(rng, 1, 4);
    Matrix inputs(n, 1);
    for (int i = 0; i < n; ++i) inputs(i, 0) = i;  // row id travels with the entry
    Matrix emb = normal_matrix(n, p, rng);
    if (inst % 4 == 0) emb = emb.array().round().matrix();  // force distance ties
    Labels labels(static_cast<std::size_t>(n));
    for (int& y : labels) y = uniform_int(rng, 0, k - 1);
    const Matrix means = normal_matrix(k, p, rng, 0.5);
    std::vector<int> budget(static_cast<std::size_t>(k));
    for (int& b : budget) b = uniform_int(rng, 0, 12);

    const auto picked = select_mof(inputs, emb, labels, means, budget);
    const auto expected = sorted_mof_rows(emb, labels, means, budget);
    bool same = picked.size() == expected.size();
    for (std::size_t i = 0; same && i < picked.size(); ++i)
      same = static_cast<int>(picked[i].input(0)) == expected[i];
    agree += same ? 1 : 0;
  }
  return {5, "", agree == 100, fmt("%d/100 instances match the sort oracle", agree)};
}

struct PairedRuns {
  double full_drop = 0.0;
  double naive_drop = 0.0;
};

PairedRuns forgetting(std::uint64_t seed, bool imbalance) {
  PairedRuns out;
  for (int s = 0; s < kSeeds; ++s) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(s);
    out.full_drop += run_stream(moons_config(run_seed, 1.0, 10, imbalance)).forgetting_task0() / kSeeds;
    out.naive_drop += run_stream(moons_config(run_seed, 0.0, 0, imbalance)).forgetting_task0() / kSeeds;
  }
  return out;
}

CheckResult forgetting_mitigation(std::uint64_t seed) {
  const PairedRuns r = forgetting(seed, false);
  const bool ok = r.full_drop < r.naive_drop && r.full_drop <= 0.05;
  return {6, "", ok,
          fmt("task-0 drop: full method %.2f pts, lambda=0/N_b=0 %.2f pts (need strictly smaller and <= 5)",
              100 * r.full_drop, 100 * r.naive_drop)};
}

CheckResult adaptation_gain(std::uint64_t seed) {
  std::string detail;
  bool ok = true;
  for (int stream = 0; stream < 2; ++stream) {
    std::vector<double> gain;
    for (int s = 0; s < kSeeds; ++s) {
      const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(s);
      const auto cfg = stream == 0 ? moons_config(run_seed, 1.0, 10) : blobs_config(run_seed, 1.0, 10);
      const StreamOutcome o = run_stream(cfg);
      gain.resize(static_cast<std::size_t>(o.steps() - 1), 0.0);
      for (int t = 1; t < o.steps(); ++t)
        gain[static_cast<std::size_t>(t - 1)] += (o.accuracy[static_cast<std::size_t>(t)][static_cast<std::size_t>(t)] -
                                                  o.accuracy[0][static_cast<std::size_t>(t)]) / kSeeds;
    }
    detail += stream == 0 ? "moons gains" : "; blobs gains";
    for (double g : gain) {
      detail += fmt(" %+.2f", 100 * g);
      ok = ok && g >= 0.03;
    }
  }
  return {7, "", ok, detail + " pts (need >= 3 each)"};
}

CheckResult buffer_monotonicity(std::uint64_t seed) {
  const int levels[] = {0, 10, 50};
  double mean[3] = {0, 0, 0};
  for (int l = 0; l < 3; ++l)
    for (int s = 0; s < kSeeds; ++s)
      mean[l] += run_stream(moons_config(seed + static_cast<std::uint64_t>(s), 1.0, levels[l])).final_mean() / kSeeds;
  const bool ok = mean[1] >= mean[0] - 0.01 && mean[2] >= mean[1] - 0.01;
  return {8, "", ok,
          fmt("final mean accuracy N_b=0: %.4f, N_b=10: %.4f, N_b=50: %.4f (slack 0.01)", mean[0], mean[1], mean[2])};
}

CheckResult imbalance_robustness(std::uint64_t seed) {
  const PairedRuns r = forgetting(seed, true);
  const bool ok = r.full_drop < r.naive_drop && r.full_drop <= 0.05;
  return {9, "", ok,
          fmt("imbalanced task-0 drop: full method %.2f pts, lambda=0/N_b=0 %.2f pts (need strictly smaller and <= 5)",
              100 * r.full_drop, 100 * r.naive_drop)};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CheckResult determinism(std::uint64_t seed) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / fmt("cidal_determinism_%llu", static_cast<unsigned long long>(seed));
  std::string bytes[2];
  for (int rep = 0; rep < 2; ++rep) {
    ExperimentConfig cfg = moons_config(seed, 1.0, 10);
    cfg.output_dir = (root / (rep == 0 ? "a" : "b")).string();
    run_experiment(cfg);
    bytes[rep] = slurp(fs::path(cfg.output_dir) / "metrics.csv");
  }
  fs::remove_all(root);
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
  return {10, "", ok, fmt("metrics.csv %zu vs %zu bytes, %s", bytes[0].size(), bytes[1].size(),
                          ok ? "identical" : "different")};
}

CheckResult bound_trend(std::uint64_t seed) {
  int ok_steps = 0, steps = 0, ok_seeds = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const StreamOutcome o = run_stream(moons_config(seed + static_cast<std::uint64_t>(s), 1.0, 10));
    bool all = true;
    for (int t = 1; t < o.steps(); ++t) {
      const EpochLog* first = nullptr;
      const EpochLog* last = nullptr;
      for (const EpochLog& log : o.history) {
        if (log.time_step != t) continue;
        if (!first) first = &log;
        last = &log;
      }
      const bool down = first && last && last->swd_current < first->swd_current;
      ok_steps += down ? 1 : 0;
      ++steps;
      all = all && down;
    }
    ok_seeds += all ? 1 : 0;
  }
  return {11, "", ok_seeds == kSeeds,
          fmt("%d/%d seeds decrease at every step (%d/%d steps)", ok_seeds, kSeeds, ok_steps, steps)};
}

}  // namespace

const std::vector<CheckSpec>& all_checks() {
  static const std::vector<CheckSpec> specs = {
      {1, "1-D closed form matches the permutation oracle", 1.0, false, swd_oracle},
      {2, "sliced distance stays below the exact distance", 30.0, false, sliced_below_exact},
      {3, "adaptation loss gradient vs finite differences", 30.0, false, loss_gradient},
      {4, "mixture fit matches the direct formulas", 1.0, false, gmm_map},
      {5, "buffer selection matches the sort oracle", 1.0, false, mof_selection},
      {6, "forgetting below the naive ablation", 300.0, true, forgetting_mitigation},
      {7, "adaptation gain over source-only", 300.0, true, adaptation_gain},
      {8, "accuracy non-decreasing in buffer size", 900.0, true, buffer_monotonicity},
      {9, "forgetting below the naive ablation under imbalance", 300.0, true, imbalance_robustness},
      {10, "identical metrics for identical config and seed", 0.0, true, determinism},
      {11, "alignment distance falls within every step", 0.0, true, bound_trend},
  };
  return specs;
}

CheckResult run_check(const CheckSpec& spec, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = spec.run(seed);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.id = spec.id;
  r.title = spec.title;
  r.time_limit = spec.time_limit;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (spec.time_limit > 0.0 && r.seconds >= spec.time_limit) {
    r.passed = false;
    r.detail += fmt(" [over time limit %.0f s]", spec.time_limit);
  }
  return r;
}

std::string format_result(const CheckResult& r) {
  std::string line = r.passed ? "PASS" : "FAIL";
  line += fmt("  [%2d] ", r.id) + r.title + ": " + r.detail + fmt(" (%.2f s", r.seconds);
  if (r.time_limit > 0.0) line += fmt(", limit %.0f s", r.time_limit);
  return line + ")";
}

}  // namespace cidal::checks
