#include <gtest/gtest.h>

#include "cidal/config.hpp"

using namespace cidal;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "t.cfg");
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const ExperimentConfig c = parse_config_text("stream.kind = moons\n");
  EXPECT_EQ(c.stream.kind, StreamKind::moons);
  EXPECT_EQ(c.stream.rotations_deg, (std::vector<double>{0.0, 30.0, 60.0}));
  EXPECT_EQ(c.hyper.n_b, 10);
  EXPECT_EQ(c.hyper.lambda, 1.0);
  EXPECT_EQ(c.hyper.tau, 0.9);
  EXPECT_EQ(c.hyper.epochs_source, 300);
  EXPECT_EQ(c.hyper.adapt_learning_rate, 5e-4);
  EXPECT_EQ(c.arch.encoder_widths, (std::vector<int>{16, 8}));
}

TEST(Config, FullFile) {
  const ExperimentConfig c = parse_config_text(
      "# blobs run\n"
      "stream.kind = blobs\n"
      "stream.means = 0 0; 2 0\n"
      "stream.k = 2\n"
      "stream.shifts = 0 0; 1 1   # two domains\n"
      "seed = 12\n"
      "lambda = 0.5\n"
      "n_b = 4\n"
      "model.encoder = 32\n"
      "model.activation = tanh\n"
      "ablation.disable_buffer = true\n"
      "ablation.tau_sweep = 0.5, 0.7\n"
      "run_id = x\n");
  EXPECT_EQ(c.stream.domain_count(), 2);
  EXPECT_EQ(c.stream.blob_means(1, 0), 2.0);
  EXPECT_EQ(c.stream.blob_shifts(1, 1), 1.0);
  EXPECT_EQ(c.stream.cov_scale, 0.25);
  EXPECT_EQ(c.hyper.seed, 12u);
  EXPECT_EQ(c.arch.hidden, Activation::tanh);
  EXPECT_EQ(c.tau_sweep, (std::vector<double>{0.5, 0.7}));
  EXPECT_EQ(c.hyper.n_b, 4);
  EXPECT_EQ(c.effective_hyper().n_b, 0);
  EXPECT_EQ(c.effective_hyper().lambda, 0.5);
  EXPECT_EQ(c.run_id, "x");
}

TEST(Config, BlobDefaultsFilledIn) {
  const ExperimentConfig c = parse_config_text("stream.kind = blobs\n");
  const StreamConfig d = default_blob_stream();
  EXPECT_EQ(c.stream.blob_means, d.blob_means);
  EXPECT_EQ(c.stream.blob_shifts, d.blob_shifts);
  EXPECT_NE(error_of("stream.kind = blobs\nstream.k = 4\n"), "");
}

TEST(Config, LambdaOverride) {
  const ExperimentConfig c = parse_config_text("stream.kind = moons\nablation.lambda_override = 0\n");
  EXPECT_EQ(c.effective_hyper().lambda, 0.0);
  EXPECT_EQ(c.hyper.lambda, 1.0);
}

TEST(Config, OutOfRangeTau) {
  const std::string msg = error_of("stream.kind = moons\ntau = 1.5\n");
  EXPECT_NE(msg.find("t.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("tau"), std::string::npos) << msg;
}

TEST(Config, UnknownAndDuplicateKeysNameTheLine) {
  std::string msg = error_of("stream.kind = moons\n\nlamda = 1\n");
  EXPECT_NE(msg.find("t.cfg:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key 'lamda'"), std::string::npos) << msg;
  msg = error_of("stream.kind = moons\nseed = 1\nseed = 2\n");
  EXPECT_NE(msg.find("t.cfg:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Config, MalformedInput) {
  EXPECT_NE(error_of("stream.kind moons\n").find("t.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\n").find("stream.kind"), std::string::npos);
  EXPECT_NE(error_of("stream.kind = spirals\n"), "");
  EXPECT_NE(error_of("stream.kind = moons\nn_b = -3\n"), "");
  EXPECT_NE(error_of("stream.kind = moons\nnormalize_swd = maybe\n"), "");
  EXPECT_THROW(parse_config("/nonexistent/cidal.cfg"), IoError);
}
