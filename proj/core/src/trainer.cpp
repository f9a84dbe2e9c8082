#include "cidal/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace cidal {

namespace {

// Stream tags for derive_seed.
enum SeedTag : std::uint64_t {
  kShuffle = 1,
  kPseudo,
  kPseudoBatch,
  kBufferBatch,
  kGmmBatch,
  kProjections,
  kDiagnostics,
};

std::vector<int> permutation(int n, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

// m indices into [0, n): without replacement when m <= n.
std::vector<int> draw_indices(int n, int m, std::uint64_t seed) {
  if (m <= n) {
    auto perm = permutation(n, seed);
    perm.resize(static_cast<std::size_t>(m));
    return perm;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> out(static_cast<std::size_t>(m));
  for (int& i : out) i = pick(rng);
  return out;
}

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

void HyperParams::validate() const {
  require(lambda >= 0.0, "lambda must be >= 0");
  require(tau >= 0.0 && tau < 1.0, "tau must lie in [0, 1)");
  require(n_b >= 0, "n_b must be >= 0");
  require(n_p >= 0, "n_p must be >= 0 (0 selects the target size)");
  require(l_projections >= 1, "l_projections must be >= 1");
  require(epochs_source >= 0 && epochs_adapt >= 0, "epoch counts must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(adapt_learning_rate > 0.0, "adapt_learning_rate must be > 0");
}

TrainerState make_trainer_state(ModelParams model, const HyperParams& hyper) {
  hyper.validate();
  model.validate();
  TrainerState s;
  s.buffer = ReplayBuffer(hyper.n_b, model.class_count());
  s.model = std::move(model);
  return s;
}

void train_source(TrainerState& state, const LabeledSet& source, const HyperParams& hyper,
                  const EpochObserver& observer) {
  hyper.validate();
  require(state.time_step == 0, "source training must come first (time_step = 0)");
  require(source.size() >= 1, "source set is empty");
  require_shape(source.inputs.cols() == state.model.input_width(), "source width does not match model input");
  const int k = state.model.class_count();
  const auto counts = class_counts(source.labels, k);
  for (int j = 0; j < k; ++j)
    require(counts[static_cast<std::size_t>(j)] > 0, "class " + std::to_string(j) + " absent from source data");

  AdamState adam = AdamState::for_model(state.model, hyper.learning_rate);
  const int n = source.size();
  for (int epoch = 0; epoch < hyper.epochs_source; ++epoch) {
    const auto perm = permutation(n, derive_seed(hyper.seed, 0, epoch, kShuffle));
    double loss_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += hyper.batch_size) {
      const int stop = std::min(n, start + hyper.batch_size);
      const std::vector<int> rows(perm.begin() + start, perm.begin() + stop);
      const Matrix x = gather_rows(source.inputs, rows);
      const Labels y = gather_labels(source.labels, rows);
      const ForwardResult fwd = forward(state.model, x);
      const CrossEntropy ce = cross_entropy(fwd.logits, y);
      adam_step(state.model, backward(state.model, fwd.cache, ce.grad, Matrix()), adam);
      loss_sum += ce.loss;
      ++batches;
    }
    EpochLog log;
    log.time_step = 0;
    log.epoch = epoch;
    log.loss_total = loss_sum / std::max(batches, 1);
    state.history.push_back(log);
    if (observer) observer(state, log);
  }

  const Matrix emb = embed(state.model, source.inputs);
  state.gmm = fit_map(emb, source.labels, k);
  state.buffer = ReplayBuffer(hyper.n_b, k);
  state.buffer.append(select_mof(source.inputs, emb, source.labels, state.gmm.means, class_budgets(hyper.n_b, k, counts)),
                      0);
  state.time_step = 1;
}

AdaptationLoss adaptation_loss(const ModelParams& model, const AdaptationBatch& batch, const ProjectionSet& proj,
                               double lambda, SwdOptions swd) {
  require(batch.target.rows() >= 1 && batch.pseudo_z.rows() >= 1, "target and pseudo batches must be nonempty");
  require_shape(batch.gmm_samples.rows() == batch.target.rows(), "mixture samples must match the target batch size");
  require(lambda >= 0.0, "lambda must be >= 0");

  AdaptationLoss out;
  out.grads = zeros_like(model);

  // (i) classifier head on mixture pseudo-samples.
  const HeadResult head = forward_head(model, batch.pseudo_z);
  const CrossEntropy ce_pseudo = cross_entropy(head.logits, batch.pseudo_labels);
  out.components[0] = ce_pseudo.loss;
  accumulate(out.grads, backward_head(model, head.cache, ce_pseudo.grad));

  // (iii) target embeddings vs mixture samples.
  if (lambda > 0.0) {
    const ForwardResult fwd = forward(model, batch.target);
    const SwdValueGrad s = sliced_wasserstein_value_grad(fwd.embeddings, batch.gmm_samples, proj, swd);
    out.components[2] = lambda * s.value;
    accumulate(out.grads, backward(model, fwd.cache, Matrix(), lambda * s.grad_x));
  }

  // (ii) + (iv) replayed samples through the full model.
  if (batch.buffer && batch.buffer->inputs.rows() > 0) {
    const ForwardResult fwd = forward(model, batch.buffer->inputs);
    const CrossEntropy ce_buf = cross_entropy(fwd.logits, batch.buffer->labels);
    out.components[1] = ce_buf.loss;
    Matrix d_embed;
    if (lambda > 0.0) {
      require_shape(batch.buffer->inputs.rows() == batch.gmm_samples.rows(),
                    "buffer batch must match the mixture sample count");
      const SwdValueGrad s = sliced_wasserstein_value_grad(fwd.embeddings, batch.gmm_samples, proj, swd);
      out.components[3] = lambda * s.value;
      d_embed = lambda * s.grad_x;
    }
    accumulate(out.grads, backward(model, fwd.cache, ce_buf.grad, d_embed));
  }

  out.total = out.components[0] + out.components[1] + out.components[2] + out.components[3];
  return out;
}

void run_time_step(TrainerState& state, const UnlabeledSet& target, const HyperParams& hyper,
                   const EpochObserver& observer) {
  hyper.validate();
  require(state.time_step >= 1, "adaptation needs a trained source model and mixture");
  require(target.size() >= 1, "target set is empty");
  require_shape(target.inputs.cols() == state.model.input_width(), "target width does not match model input");
  const int t = state.time_step;
  const int k = state.model.class_count();
  const int p = state.model.embedding_width();
  const std::uint64_t seed = hyper.seed;
  const SwdOptions swd{hyper.normalize_swd};

  const int n_p = hyper.n_p > 0 ? hyper.n_p : target.size();
  const PseudoDataset pseudo = draw_pseudo_dataset(state.gmm, state.model, n_p, hyper.tau,
                                                   kPseudoAttemptFactor * n_p, derive_seed(seed, t, kPseudo));

  AdamState adam = AdamState::for_model(state.model, hyper.adapt_learning_rate);
  const int n = target.size();
  for (int epoch = 0; epoch < hyper.epochs_adapt; ++epoch) {
    const auto perm = permutation(n, derive_seed(seed, t, epoch, kShuffle));
    EpochLog log;
    log.time_step = t;
    log.epoch = epoch;
    int batches = 0;
    for (int start = 0, b = 0; start < n; start += hyper.batch_size, ++b) {
      const int stop = std::min(n, start + hyper.batch_size);
      const int m = stop - start;
      AdaptationBatch batch;
      batch.target = gather_rows(target.inputs, std::vector<int>(perm.begin() + start, perm.begin() + stop));
      const auto pick = draw_indices(pseudo.size(), m, derive_seed(seed, t, epoch, b, kPseudoBatch));
      batch.pseudo_z = gather_rows(pseudo.z, pick);
      batch.pseudo_labels = gather_labels(pseudo.labels, pick);
      if (!state.buffer.empty())
        batch.buffer = state.buffer.sample_batch(m, derive_seed(seed, t, epoch, b, kBufferBatch));
      batch.gmm_samples = sample(state.gmm, m, derive_seed(seed, t, epoch, b, kGmmBatch)).z;
      const ProjectionSet proj =
          sample_projections(p, hyper.l_projections, derive_seed(seed, t, epoch, b, kProjections));

      // Diagnostic on the pre-update model, independent of lambda.
      const Matrix target_emb = embed(state.model, batch.target);
      log.swd_current += sliced_wasserstein_sq(target_emb, batch.gmm_samples, proj, {true});

      const AdaptationLoss loss = adaptation_loss(state.model, batch, proj, hyper.lambda, swd);
      adam_step(state.model, loss.grads, adam);
      log.loss_total += loss.total;
      log.loss_ce_pseudo += loss.components[0];
      log.loss_ce_buffer += loss.components[1];
      log.loss_swd_target += loss.components[2];
      log.loss_swd_buffer += loss.components[3];
      ++batches;
    }
    const double inv = 1.0 / std::max(batches, 1);
    for (double* v : {&log.loss_total, &log.loss_ce_pseudo, &log.loss_ce_buffer, &log.loss_swd_target,
                      &log.loss_swd_buffer, &log.swd_current})
      *v *= inv;
    state.history.push_back(log);
    if (observer) observer(state, log);
  }

  // Mixture refit: current-task embeddings with predicted labels, plus the
  // buffer with its stored labels. Empty classes keep the previous component.
  const Matrix target_emb = embed(state.model, target.inputs);
  const Labels target_pred = argmax_rows(classify_from_embedding(state.model, target_emb));
  Matrix fit_emb = target_emb;
  Labels fit_labels = target_pred;
  if (!state.buffer.empty()) {
    fit_emb = stack_rows(target_emb, embed(state.model, state.buffer.inputs()));
    const Labels buf_labels = state.buffer.labels();
    fit_labels.insert(fit_labels.end(), buf_labels.begin(), buf_labels.end());
  }
  const GmmState previous = state.gmm;
  state.gmm = fit_map(fit_emb, fit_labels, k, {}, &previous);

  const std::uint64_t diag_seed = derive_seed(seed, t, kDiagnostics);
  const Matrix before = gmm_reference_samples(previous, diag_seed);
  const Matrix after = gmm_reference_samples(state.gmm, diag_seed);
  const double drift = sliced_wasserstein_sq(before, after,
                                             sample_projections(p, hyper.l_projections, derive_seed(diag_seed, 1)),
                                             {true});
  for (auto it = state.history.rbegin(); it != state.history.rend() && it->time_step == t; ++it)
    it->swd_gmm_drift = drift;

  state.buffer.append(select_mof(target.inputs, target_emb, target_pred, state.gmm.means,
                                 class_budgets(hyper.n_b, k, class_counts(target_pred, k)), t),
                      t);
  state.time_step = t + 1;
}

double evaluate(const ModelParams& model, const Matrix& inputs, std::span<const int> labels) {
  require(inputs.rows() >= 1, "evaluation set is empty");
  require_shape(static_cast<Eigen::Index>(labels.size()) == inputs.rows(), "label count does not match inputs");
  const Labels pred = argmax_rows(forward(model, inputs).logits);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double evaluate(const ModelParams& model, const LabeledSet& eval) { return evaluate(model, eval.inputs, eval.labels); }

Matrix gmm_reference_samples(const GmmState& gmm, std::uint64_t seed, int n) { return sample(gmm, n, seed).z; }

BoundDiagnostics bound_diagnostics(const TrainerState& state, const Matrix& target_inputs,
                                   const Matrix& previous_gmm_samples, const HyperParams& hyper,
                                   std::uint64_t seed) {
  const int p = state.model.embedding_width();
  const ProjectionSet proj = sample_projections(p, hyper.l_projections, derive_seed(seed, kProjections));
  BoundDiagnostics d;
  const Matrix emb = embed(state.model, target_inputs);
  const Matrix fresh = gmm_reference_samples(state.gmm, derive_seed(seed, kGmmBatch), static_cast<int>(emb.rows()));
  d.swd_current = sliced_wasserstein_sq(emb, fresh, proj, {true});

  const Matrix current = gmm_reference_samples(state.gmm, seed, static_cast<int>(previous_gmm_samples.rows()));
  d.swd_gmm_drift = sliced_wasserstein_sq(previous_gmm_samples, current, proj, {true});
  return d;
}

}  // namespace cidal
