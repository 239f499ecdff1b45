#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "mrca/common.hpp"
#include "mrca/embedding.hpp"

namespace mrca {

// Static architecture description. All parameter tensor shapes derive from
// these numbers.
struct ShapeMeta {
  int embed_dim = 300;     // word-vector width d; rows carry d+2 features
  int hidden_units = 500;  // LSTM units per direction
  int seq_len = 100;       // padded sentence length
  int pool_size = 80;
  int pool_stride = 2;
  int n_relations = 0;

  int input_dim() const { return embed_dim + 2; }
  int pooled_len() const { return (seq_len - pool_size) / pool_stride + 1; }
  int flat_dim() const { return pooled_len() * 2 * hidden_units; }
  void validate() const;

  friend bool operator==(const ShapeMeta &, const ShapeMeta &) = default;
};

// Output unit activation. Linear scores thresholded at 0.5 are the default;
// sigmoid marks checkpoints trained with the cross-entropy variant so their
// scores pass through a sigmoid before thresholding.
enum class OutputKind { linear, sigmoid };

OutputKind output_kind_from_string(const std::string &name);
std::string to_string(OutputKind kind);

// The eight trainable tensors. Bias tensors are stored as 1-row matrices so
// optimizers, checkpoints and gradient checks can treat every tensor
// uniformly. Gate blocks are ordered [input, forget, cell, output].
struct TensorSet {
  Eigen::MatrixXd fwd_w_input;      // (d+2) x 4u
  Eigen::MatrixXd fwd_w_recurrent;  // u x 4u
  Eigen::MatrixXd fwd_bias;         // 1 x 4u
  Eigen::MatrixXd bwd_w_input;
  Eigen::MatrixXd bwd_w_recurrent;
  Eigen::MatrixXd bwd_bias;
  Eigen::MatrixXd dense_kernel;  // flat_dim x |P|
  Eigen::MatrixXd dense_bias;    // 1 x |P|

  template <class F>
  void for_each(F &&f) {
    f("fwd.w_input", fwd_w_input);
    f("fwd.w_recurrent", fwd_w_recurrent);
    f("fwd.bias", fwd_bias);
    f("bwd.w_input", bwd_w_input);
    f("bwd.w_recurrent", bwd_w_recurrent);
    f("bwd.bias", bwd_bias);
    f("dense.kernel", dense_kernel);
    f("dense.bias", dense_bias);
  }

  template <class F>
  void for_each(F &&f) const {
    f("fwd.w_input", fwd_w_input);
    f("fwd.w_recurrent", fwd_w_recurrent);
    f("fwd.bias", fwd_bias);
    f("bwd.w_input", bwd_w_input);
    f("bwd.w_recurrent", bwd_w_recurrent);
    f("bwd.bias", bwd_bias);
    f("dense.kernel", dense_kernel);
    f("dense.bias", dense_bias);
  }

  static TensorSet zeros(const ShapeMeta &shape);
  std::size_t param_count() const;
  bool all_finite() const;

  TensorSet &operator+=(const TensorSet &other);
  TensorSet &operator*=(double factor);
};

using ModelGrads = TensorSet;

struct ModelParams {
  ShapeMeta shape;
  OutputKind output = OutputKind::linear;
  TensorSet tensors;
};

// Deterministic initialization: input and dense kernels from a symmetric
// uniform distribution scaled by fan-in + fan-out, recurrent kernels from
// per-gate orthogonal blocks, biases zero.
ModelParams init_params(std::uint64_t seed, const ShapeMeta &shape,
                        OutputKind output = OutputKind::linear);

enum class Direction { forward, backward };

// Per-timestep activations of one LSTM direction, stored in processing
// order (the backward direction processes the reversed sequence).
struct LstmCache {
  Eigen::MatrixXd x;  // inputs in processing order
  Eigen::MatrixXd gate_i, gate_f, gate_g, gate_o;
  Eigen::MatrixXd cell;
  Eigen::MatrixXd cell_tanh;
  Eigen::MatrixXd hidden;
};

// Standard LSTM recurrence with sigmoid gates and tanh cell/output
// nonlinearity; every hidden value lies strictly in (-1, 1). Returns the
// hidden sequence in original time order. The backward direction consumes
// the reversed sequence and re-reverses its outputs.
Eigen::MatrixXd lstm_forward(const ModelParams &params,
                             const Eigen::MatrixXd &x, Direction direction,
                             LstmCache *cache = nullptr);

// Mean over sliding windows along the time axis, each feature column
// independently: output length floor((L - pool) / stride) + 1.
Eigen::MatrixXd avg_pool(const Eigen::MatrixXd &h, int pool, int stride);

struct ForwardCache {
  LstmCache fwd, bwd;
  Eigen::MatrixXd pooled;
  Eigen::RowVectorXd flat_dropped;  // flattened pooled matrix after dropout
  Eigen::RowVectorXd dropout_mask;  // per-element scale, 1/(1-rate) or 0
  bool training = false;
};

// Full pass: both LSTM directions concatenated, average pooling, row-major
// flatten, inverted dropout (training only), affine output head. Scores are
// raw linear values regardless of OutputKind; sigmoid models squash at
// prediction time.
Eigen::RowVectorXd forward(const ModelParams &params,
                           const Eigen::MatrixXd &x, bool training, Rng &rng,
                           double dropout_rate = 0.15,
                           ForwardCache *cache = nullptr);

// Inference-mode scores with any output activation applied.
Eigen::RowVectorXd predict_scores(const ModelParams &params,
                                  const Eigen::MatrixXd &x);

// label_i = 1 iff scores_i >= threshold.
Eigen::RowVectorXd predict(const Eigen::RowVectorXd &scores,
                           double threshold = 0.5);

// Exact gradients of scores . dscores with respect to every tensor,
// including the dropout mask, pooling windows, concatenation and both LSTM
// recurrences. Accumulates into `grads` so batch members sum naturally.
void backward(const ModelParams &params, const ForwardCache &cache,
              const Eigen::RowVectorXd &dscores, ModelGrads &grads);

}  // namespace mrca
