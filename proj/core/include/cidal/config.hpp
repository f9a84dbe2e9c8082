#pragma once

// Experiment config: a line-oriented `key = value` file. `#` starts a comment.
// Lists are comma-separated; matrices separate rows with `;`.
//
//   stream.kind = moons              # moons | blobs | idx      (required)
//   stream.rotations = 0, 30, 60     # moons: one domain per angle
//   stream.noise = 0.1
//   stream.n_train = 500
//   stream.n_test = 500
//   stream.imbalance = false         # keep (i+1)/k of class i in every domain
//   stream.k = 3                     # blobs
//   stream.means = 0 0; 3 0; 1.5 2.6
//   stream.shifts = 0 0; 0 1; 0 2    # blobs: one domain per row
//   stream.cov_scale = 0.25
//   stream.idx_k = 10                # idx: one domain per entry of each list
//   stream.idx_train_images = a.idx, b.idx
//   stream.idx_train_labels = ...
//   stream.idx_test_images = ...
//   stream.idx_test_labels = ...
//   seed = 0
//   lambda = 1.0
//   tau = 0.9
//   n_b = 10
//   n_p = 0                          # 0: size of the current target set
//   l_projections = 64
//   epochs_source = 300
//   epochs_adapt = 30
//   batch_size = 32
//   learning_rate = 0.001
//   adapt_learning_rate = 0.0005
//   normalize_swd = false
//   model.encoder = 16, 8
//   model.classifier =               # hidden widths of the head (may be empty)
//   model.activation = relu
//   model.embedding_activation = relu
//   ablation.disable_buffer = false
//   ablation.lambda_override = 0
//   ablation.tau_sweep = 0.5, 0.7, 0.9
//   ablation.n_b_sweep = 0, 10, 50
//   output_dir = out
//   run_id = run

#include <optional>
#include <string>
#include <vector>

#include "cidal/data.hpp"
#include "cidal/nn.hpp"
#include "cidal/trainer.hpp"

namespace cidal {

struct ExperimentConfig {
  StreamConfig stream;
  HyperParams hyper;
  Architecture arch;
  bool disable_buffer = false;
  std::optional<double> lambda_override;
  std::vector<double> tau_sweep;
  std::vector<int> n_b_sweep;
  std::string output_dir = "out";
  std::string run_id = "run";

  // Hyperparameters after the ablation flags are applied.
  HyperParams effective_hyper() const;
  void validate() const;
};

// Throws ParseError naming the key and line for unknown keys, malformed
// values and out-of-range settings.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");
ExperimentConfig parse_config(const std::string& path);

}  // namespace cidal
