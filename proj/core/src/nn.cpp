#include "cidal/nn.hpp"

#include <cmath>
#include <random>

namespace cidal {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ValidationError("unknown activation '" + name + "'");
}

namespace {

Matrix activate(const Matrix& pre, Activation a) {
  switch (a) {
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::identity: return pre;
  }
  return pre;
}

// d act / d pre, elementwise, multiplied into `upstream`.
Matrix activation_backward(const Matrix& pre, const Matrix& upstream, Activation a) {
  switch (a) {
    case Activation::relu: return (pre.array() > 0.0).select(upstream, 0.0);
    case Activation::tanh: {
      const auto t = pre.array().tanh();
      return (upstream.array() * (1.0 - t * t)).matrix();
    }
    case Activation::identity: return upstream;
  }
  return upstream;
}

Matrix affine(const Layer& layer, const Matrix& x) {
  Matrix pre = x * layer.weight.transpose();
  pre.rowwise() += layer.bias.transpose();
  return pre;
}

Matrix stack_forward(const std::vector<Layer>& layers, const Matrix& x, StackCache* cache) {
  Matrix h = x;
  if (cache) cache->clear();
  for (const Layer& layer : layers) {
    require_shape(h.cols() == layer.in_width(), "layer expects width " + std::to_string(layer.in_width()) +
                                                    ", got " + std::to_string(h.cols()));
    Matrix pre = affine(layer, h);
    Matrix out = activate(pre, layer.activation);
    if (cache) cache->push_back({std::move(h), std::move(pre)});
    h = std::move(out);
  }
  return h;
}

// Returns d loss / d stack input; fills `grads` (same length as `layers`).
Matrix stack_backward(const std::vector<Layer>& layers, const StackCache& cache, Matrix upstream,
                      std::vector<Layer>& grads) {
  require_shape(cache.size() == layers.size(), "stale cache: layer count mismatch");
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Layer& layer = layers[i];
    const LayerCache& c = cache[i];
    require_shape(c.pre.cols() == layer.out_width() && c.input.cols() == layer.in_width() &&
                      upstream.rows() == c.pre.rows() && upstream.cols() == c.pre.cols(),
                  "stale cache: shape mismatch at layer " + std::to_string(i));
    const Matrix dpre = activation_backward(c.pre, upstream, layer.activation);
    grads[i].weight += dpre.transpose() * c.input;
    grads[i].bias += dpre.colwise().sum().transpose();
    upstream = dpre * layer.weight;
  }
  return upstream;
}

bool all_finite(const Layer& l) { return l.weight.allFinite() && l.bias.allFinite(); }

template <typename F>
void for_each_pair(ModelParams& a, const ModelParams& b, F&& f) {
  auto visit = [&](std::vector<Layer>& la, const std::vector<Layer>& lb) {
    require_shape(la.size() == lb.size(), "parameter structure mismatch");
    for (std::size_t i = 0; i < la.size(); ++i) {
      require_shape(la[i].weight.rows() == lb[i].weight.rows() && la[i].weight.cols() == lb[i].weight.cols() &&
                        la[i].bias.size() == lb[i].bias.size(),
                    "parameter shape mismatch");
      f(la[i].weight.reshaped(), lb[i].weight.reshaped());
      f(la[i].bias, lb[i].bias);
    }
  };
  visit(a.encoder, b.encoder);
  visit(a.classifier, b.classifier);
}

}  // namespace

int ModelParams::input_width() const {
  return encoder.empty() ? (classifier.empty() ? 0 : classifier.front().in_width()) : encoder.front().in_width();
}

int ModelParams::embedding_width() const {
  if (!encoder.empty()) return encoder.back().out_width();
  return classifier.empty() ? 0 : classifier.front().in_width();
}

int ModelParams::class_count() const { return classifier.empty() ? embedding_width() : classifier.back().out_width(); }

void ModelParams::validate() const {
  require_shape(!classifier.empty(), "model needs at least one classifier layer");
  int width = input_width();
  for (const auto* stack : {&encoder, &classifier}) {
    for (const Layer& l : *stack) {
      require_shape(l.in_width() == width, "layer dimensions do not chain");
      require_shape(l.bias.size() == l.out_width(), "bias width mismatch");
      require_shape(all_finite(l), "non-finite parameter");
      width = l.out_width();
    }
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* stack : {&encoder, &classifier})
    for (const Layer& l : *stack) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

ModelParams make_model(const Architecture& arch, std::uint64_t seed) {
  require(arch.input_width >= 1 && arch.class_count >= 2, "architecture needs input width >= 1 and >= 2 classes");
  std::mt19937_64 rng(seed);
  ModelParams model;
  auto make_layer = [&](int in, int out, Activation act) {
    require(out >= 1, "layer width must be >= 1");
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> u(-bound, bound);
    Layer l{Matrix(out, in), Vector::Zero(out), act};
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
    return l;
  };
  int width = arch.input_width;
  for (std::size_t i = 0; i < arch.encoder_widths.size(); ++i) {
    const bool last = i + 1 == arch.encoder_widths.size();
    model.encoder.push_back(make_layer(width, arch.encoder_widths[i], last ? arch.embedding : arch.hidden));
    width = arch.encoder_widths[i];
  }
  for (int w : arch.classifier_widths) {
    model.classifier.push_back(make_layer(width, w, arch.hidden));
    width = w;
  }
  model.classifier.push_back(make_layer(width, arch.class_count, Activation::identity));
  return model;
}

ModelParams zeros_like(const ModelParams& model) {
  ModelParams z = model;
  for (auto* stack : {&z.encoder, &z.classifier}) {
    for (Layer& l : *stack) {
      l.weight.setZero();
      l.bias.setZero();
    }
  }
  return z;
}

void accumulate(ModelParams& into, const ModelParams& g, double scale) {
  for_each_pair(into, g, [scale](auto&& a, const auto& b) { a += scale * b; });
}

ForwardResult forward(const ModelParams& model, const Matrix& batch) {
  require_shape(batch.cols() == model.input_width(), "batch has " + std::to_string(batch.cols()) +
                                                         " columns, model expects " +
                                                         std::to_string(model.input_width()));
  ForwardResult r;
  r.embeddings = stack_forward(model.encoder, batch, &r.cache.encoder);
  r.logits = stack_forward(model.classifier, r.embeddings, &r.cache.classifier);
  return r;
}

Matrix embed(const ModelParams& model, const Matrix& batch) {
  require_shape(batch.cols() == model.input_width(), "batch width does not match model input width");
  return stack_forward(model.encoder, batch, nullptr);
}

Matrix classify_from_embedding(const ModelParams& model, const Matrix& z) {
  require_shape(z.cols() == model.embedding_width(), "embedding width does not match classifier input");
  return stack_forward(model.classifier, z, nullptr);
}

HeadResult forward_head(const ModelParams& model, const Matrix& z) {
  require_shape(z.cols() == model.embedding_width(), "embedding width does not match classifier input");
  HeadResult r;
  r.logits = stack_forward(model.classifier, z, &r.cache);
  return r;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    auto e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

Labels argmax_rows(const Matrix& m) {
  Labels out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index j = 0;
    m.row(i).maxCoeff(&j);
    out[static_cast<std::size_t>(i)] = static_cast<int>(j);
  }
  return out;
}

CrossEntropy cross_entropy(const Matrix& logits, std::span<const int> labels) {
  require_shape(static_cast<Eigen::Index>(labels.size()) == logits.rows(), "label count does not match logits rows");
  require(logits.rows() > 0, "cross entropy of an empty batch");
  const auto k = logits.cols();
  CrossEntropy ce;
  ce.grad.resize(logits.rows(), k);
  const double n = static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < k, "label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    Eigen::Index top = 0;
    const double m = logits.row(i).maxCoeff(&top);
    const auto shifted = logits.row(i).array() - m;
    // The top entry contributes exactly 1; log1p keeps confident rows accurate.
    double rest = 0.0;
    for (Eigen::Index j = 0; j < k; ++j)
      if (j != top) rest += std::exp(shifted(j));
    const double log_z = std::log1p(rest);
    ce.loss += log_z - shifted(y);
    ce.grad.row(i) = (shifted - log_z).exp() / n;
    ce.grad(i, y) -= 1.0 / n;
  }
  ce.loss /= n;
  return ce;
}

ModelParams backward(const ModelParams& model, const ForwardCache& cache, const Matrix& dloss_dlogits,
                     const Matrix& dloss_dembeddings) {
  ModelParams grads = zeros_like(model);
  require_shape(!cache.encoder.empty() || model.encoder.empty(), "stale cache: encoder missing");
  const Eigen::Index n = cache.classifier.empty() ? 0 : cache.classifier.front().input.rows();
  const Eigen::Index p = model.embedding_width();

  Matrix d_embed = Matrix::Zero(n, p);
  if (dloss_dlogits.size() > 0) {
    d_embed = stack_backward(model.classifier, cache.classifier, dloss_dlogits, grads.classifier);
  }
  if (dloss_dembeddings.size() > 0) {
    require_shape(dloss_dembeddings.rows() == n && dloss_dembeddings.cols() == p,
                  "embedding gradient shape does not match cache");
    d_embed += dloss_dembeddings;
  }
  if (!model.encoder.empty()) stack_backward(model.encoder, cache.encoder, std::move(d_embed), grads.encoder);
  return grads;
}

ModelParams backward_head(const ModelParams& model, const StackCache& cache, const Matrix& dloss_dlogits) {
  ModelParams grads = zeros_like(model);
  if (dloss_dlogits.size() > 0) stack_backward(model.classifier, cache, dloss_dlogits, grads.classifier);
  return grads;
}

AdamState AdamState::for_model(const ModelParams& model, double learning_rate) {
  AdamState s;
  s.first_moment = zeros_like(model);
  s.second_moment = zeros_like(model);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1, b2 = state.beta2, lr = state.learning_rate, eps = state.epsilon;

  // Moments first (need grads), then the parameter update (needs moments).
  for_each_pair(state.first_moment, grads, [b1](auto&& m, const auto& g) { m = b1 * m + (1.0 - b1) * g; });
  for_each_pair(state.second_moment, grads,
                [b2](auto&& v, const auto& g) { v = b2 * v + (1.0 - b2) * g.cwiseAbs2(); });

  ModelParams step = state.first_moment;
  for_each_pair(step, state.second_moment, [&](auto&& m, const auto& v) {
    m = ((m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix() * (-lr);
  });
  accumulate(params, step);
}

}  // namespace cidal
