#include <gtest/gtest.h>

#include "cidal/checks/stream_harness.hpp"

using namespace cidal;

TEST(StreamProperties, AdaptingToTheSourceDomainCostsLittle) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ExperimentConfig c = checks::moons_config(seed, 1.0, 10);
    c.stream.rotations_deg = {0.0, 0.0};
    const auto out = checks::run_stream(c);
    EXPECT_LE(out.accuracy[0][0] - out.accuracy[1][0], 0.02) << "seed " << seed;
  }
}

TEST(StreamProperties, AdaptationImprovesTheRotatedDomain) {
  double gain = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExperimentConfig c = checks::moons_config(seed, 1.0, 10);
    c.stream.rotations_deg = {0.0, 30.0};
    const auto out = checks::run_stream(c);
    gain += out.accuracy[1][1] - out.accuracy[0][1];
  }
  EXPECT_GT(gain / 5.0, 0.0);
}

// Before adapting to domain t, the model trained through t - 1 should already
// beat chance on it by 10 points.
TEST(StreamProperties, JumpstartAboveChance) {
  for (const bool moons : {true, false}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const ExperimentConfig c = moons ? checks::moons_config(seed, 1.0, 10) : checks::blobs_config(seed, 1.0, 10);
      const auto out = checks::run_stream(c);
      const double chance = moons ? 0.5 : 1.0 / 3.0;
      for (int t = 1; t < out.steps(); ++t)
        EXPECT_GE(out.accuracy[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(t)], chance + 0.10)
            << (moons ? "moons" : "blobs") << " seed " << seed << " domain " << t;
    }
  }
}
