#pragma once

// Dense encoder/classifier network: forward pass, reverse-mode gradients and
// the Adam optimizer. The network is split into an encoder (input -> embedding)
// and a classifier head (embedding -> logits); the embedding is the output of
// the last encoder layer.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cidal/common.hpp"

namespace cidal {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::relu;

  int in_width() const { return static_cast<int>(weight.cols()); }
  int out_width() const { return static_cast<int>(weight.rows()); }
};

// Parameters of f = h_w o phi_v. Also used as the gradient container, since a
// gradient has exactly the parameter shape.
struct ModelParams {
  std::vector<Layer> encoder;
  std::vector<Layer> classifier;

  int input_width() const;
  int embedding_width() const;
  int class_count() const;

  // Throws ShapeError unless consecutive layers chain and all entries are finite.
  void validate() const;
  std::size_t parameter_count() const;
};

struct Architecture {
  int input_width = 2;
  std::vector<int> encoder_widths{16, 8};
  std::vector<int> classifier_widths{};  // hidden widths of the head; output width is class_count
  int class_count = 2;
  Activation hidden = Activation::relu;
  Activation embedding = Activation::relu;
};

// He-style uniform initialization; deterministic per seed.
ModelParams make_model(const Architecture& arch, std::uint64_t seed);

ModelParams zeros_like(const ModelParams& model);

// into += scale * g
void accumulate(ModelParams& into, const ModelParams& g, double scale = 1.0);

// Inputs and pre-activations of each layer of one stack.
struct LayerCache {
  Matrix input;
  Matrix pre;
};
using StackCache = std::vector<LayerCache>;

struct ForwardCache {
  StackCache encoder;
  StackCache classifier;
};

struct ForwardResult {
  Matrix embeddings;
  Matrix logits;
  ForwardCache cache;
};

ForwardResult forward(const ModelParams& model, const Matrix& batch);

// Encoder only.
Matrix embed(const ModelParams& model, const Matrix& batch);

// Classifier head only, applied directly to embeddings.
Matrix classify_from_embedding(const ModelParams& model, const Matrix& z);

struct HeadResult {
  Matrix logits;
  StackCache cache;
};
HeadResult forward_head(const ModelParams& model, const Matrix& z);

// Row-wise, max-shifted.
Matrix softmax(const Matrix& logits);

Labels argmax_rows(const Matrix& m);

struct CrossEntropy {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

// Mean over rows of -log softmax(logits)[label].
CrossEntropy cross_entropy(const Matrix& logits, std::span<const int> labels);

// Reverse pass through the full network. Gradients entering at the logits
// and at the embeddings are summed. Either upstream gradient may be an empty
// (0x0) matrix, meaning zero.
ModelParams backward(const ModelParams& model, const ForwardCache& cache, const Matrix& dloss_dlogits,
                     const Matrix& dloss_dembeddings);

// Reverse pass through the classifier head for a forward_head call; encoder
// gradients are zero.
ModelParams backward_head(const ModelParams& model, const StackCache& cache, const Matrix& dloss_dlogits);

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const ModelParams& model, double learning_rate = 1e-3);
};

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

}  // namespace cidal
