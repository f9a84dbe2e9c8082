#pragma once

// Continual adaptation loop: source training, then one adaptation step per
// arriving unlabeled target domain.
//
// Each adaptation step minimizes, over minibatches,
//
//   CE(h(z_pseudo), y_pseudo)                 pseudo-samples from the mixture
// + CE(h(phi(x_buf)), y_buf)                  replayed buffer samples
// + lambda * SW^2(phi(x_target), z_mixture)   align the new domain
// + lambda * SW^2(phi(x_buf), z_mixture)      keep replayed domains aligned
//
// and afterwards refits the mixture and extends the buffer.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cidal/common.hpp"
#include "cidal/data.hpp"
#include "cidal/gmm.hpp"
#include "cidal/nn.hpp"
#include "cidal/replay.hpp"
#include "cidal/swd.hpp"

namespace cidal {

struct HyperParams {
  double lambda = 1.0;
  double tau = 0.9;
  int n_b = 10;
  int n_p = 0;  // 0: size of the current target set
  int l_projections = kDefaultProjections;
  int epochs_source = 300;
  int epochs_adapt = 30;
  int batch_size = 32;
  double learning_rate = 1e-3;        // source training
  double adapt_learning_rate = 5e-4;  // adaptation steps
  bool normalize_swd = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// Loss components of one epoch (means over its minibatches).
struct EpochLog {
  int time_step = 0;
  int epoch = 0;
  double loss_total = 0.0;
  double loss_ce_pseudo = 0.0;
  double loss_ce_buffer = 0.0;
  double loss_swd_target = 0.0;
  double loss_swd_buffer = 0.0;
  // Per-sample sliced distance between target-batch embeddings and mixture
  // samples, averaged over the epoch's minibatches (before each update).
  double swd_current = 0.0;
  // Per-sample sliced distance between mixture samples before and after the
  // refit that closes this time step (0 for the source step).
  double swd_gmm_drift = 0.0;
};

struct TrainerState {
  ModelParams model;
  GmmState gmm;
  ReplayBuffer buffer;
  int time_step = 0;  // completed tasks
  std::vector<EpochLog> history;
};

// Called after every epoch with the state as it stands (model updated, mixture
// and buffer not yet refreshed for an adaptation step).
using EpochObserver = std::function<void(const TrainerState&, const EpochLog&)>;

TrainerState make_trainer_state(ModelParams model, const HyperParams& hyper);

// Minibatch Adam on cross entropy, then the mixture fit on all source
// embeddings with true labels and the buffer seeded from the source.
void train_source(TrainerState& state, const LabeledSet& source, const HyperParams& hyper,
                  const EpochObserver& observer = {});

struct AdaptationBatch {
  Matrix target;                        // inputs, M x d
  Matrix pseudo_z;                      // embeddings, M x p
  Labels pseudo_labels;
  std::optional<ReplayBatch> buffer;    // absent when the buffer is empty
  Matrix gmm_samples;                   // M x p
};

struct AdaptationLoss {
  double total = 0.0;
  // ce_pseudo, ce_buffer, swd_target, swd_buffer; the swd terms include lambda.
  std::array<double, 4> components{};
  ModelParams grads;
};

AdaptationLoss adaptation_loss(const ModelParams& model, const AdaptationBatch& batch, const ProjectionSet& proj,
                               double lambda, SwdOptions swd = {});

// One adaptation step on an unlabeled target domain. Throws ValidationError
// if no pseudo-sample clears the confidence threshold.
void run_time_step(TrainerState& state, const UnlabeledSet& target, const HyperParams& hyper,
                   const EpochObserver& observer = {});

// Fraction of argmax-correct predictions.
double evaluate(const ModelParams& model, const LabeledSet& eval);
double evaluate(const ModelParams& model, const Matrix& inputs, std::span<const int> labels);

struct BoundDiagnostics {
  double swd_current = 0.0;
  double swd_gmm_drift = 0.0;
};

inline constexpr int kDiagnosticSamples = 512;

// Mixture samples used as the reference for drift between time steps.
Matrix gmm_reference_samples(const GmmState& gmm, std::uint64_t seed, int n = kDiagnosticSamples);

// Per-sample sliced distances: target embeddings vs fresh mixture samples,
// and `previous_gmm_samples` vs samples of the current mixture drawn with the
// same seed.
BoundDiagnostics bound_diagnostics(const TrainerState& state, const Matrix& target_inputs,
                                   const Matrix& previous_gmm_samples, const HyperParams& hyper,
                                   std::uint64_t seed);

}  // namespace cidal
