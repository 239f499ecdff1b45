#include "mrca/network.hpp"

#include <Eigen/QR>
#include <cmath>

namespace mrca {

void ShapeMeta::validate() const {
  auto positive = [](int v, const char *name) {
    if (v <= 0) {
      throw DataError(std::string("shape: ") + name + " must be positive, got " +
                      std::to_string(v));
    }
  };
  positive(embed_dim, "embed_dim");
  positive(hidden_units, "hidden_units");
  positive(seq_len, "seq_len");
  positive(pool_size, "pool_size");
  positive(pool_stride, "pool_stride");
  positive(n_relations, "n_relations");
  if (pool_size > seq_len) {
    throw DataError("shape: pool_size " + std::to_string(pool_size) +
                    " exceeds seq_len " + std::to_string(seq_len));
  }
}

OutputKind output_kind_from_string(const std::string &name) {
  if (name == "linear") return OutputKind::linear;
  if (name == "sigmoid") return OutputKind::sigmoid;
  throw DataError("unknown output kind: " + name);
}

std::string to_string(OutputKind kind) {
  return kind == OutputKind::linear ? "linear" : "sigmoid";
}

TensorSet TensorSet::zeros(const ShapeMeta &shape) {
  TensorSet t;
  const int in = shape.input_dim();
  const int u = shape.hidden_units;
  t.fwd_w_input.setZero(in, 4 * u);
  t.fwd_w_recurrent.setZero(u, 4 * u);
  t.fwd_bias.setZero(1, 4 * u);
  t.bwd_w_input.setZero(in, 4 * u);
  t.bwd_w_recurrent.setZero(u, 4 * u);
  t.bwd_bias.setZero(1, 4 * u);
  t.dense_kernel.setZero(shape.flat_dim(), shape.n_relations);
  t.dense_bias.setZero(1, shape.n_relations);
  return t;
}

std::size_t TensorSet::param_count() const {
  std::size_t n = 0;
  for_each([&](const char *, const Eigen::MatrixXd &m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

bool TensorSet::all_finite() const {
  bool ok = true;
  for_each([&](const char *, const Eigen::MatrixXd &m) {
    if (!m.allFinite()) ok = false;
  });
  return ok;
}

TensorSet &TensorSet::operator+=(const TensorSet &other) {
  fwd_w_input += other.fwd_w_input;
  fwd_w_recurrent += other.fwd_w_recurrent;
  fwd_bias += other.fwd_bias;
  bwd_w_input += other.bwd_w_input;
  bwd_w_recurrent += other.bwd_w_recurrent;
  bwd_bias += other.bwd_bias;
  dense_kernel += other.dense_kernel;
  dense_bias += other.dense_bias;
  return *this;
}

TensorSet &TensorSet::operator*=(double factor) {
  for_each([&](const char *, Eigen::MatrixXd &m) { m *= factor; });
  return *this;
}

namespace {

void fill_uniform_fan(Eigen::MatrixXd &m, Rng &rng) {
  const double limit =
      std::sqrt(6.0 / (static_cast<double>(m.rows()) + static_cast<double>(m.cols())));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-limit, limit);
    }
  }
}

Eigen::MatrixXd orthogonal(int n, Rng &rng) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      a(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

void fill_recurrent(Eigen::MatrixXd &m, int units, Rng &rng) {
  for (int gate = 0; gate < 4; ++gate) {
    m.block(0, gate * units, units, units) = orthogonal(units, rng);
  }
}

inline Eigen::ArrayXd sigmoid_array(const Eigen::ArrayXd &x) {
  return 1.0 / (1.0 + (-x).exp());
}

}  // namespace

ModelParams init_params(std::uint64_t seed, const ShapeMeta &shape,
                        OutputKind output) {
  shape.validate();
  ModelParams p;
  p.shape = shape;
  p.output = output;
  p.tensors = TensorSet::zeros(shape);
  Rng rng(mix_seed(seed, 0x1217));
  fill_uniform_fan(p.tensors.fwd_w_input, rng);
  fill_recurrent(p.tensors.fwd_w_recurrent, shape.hidden_units, rng);
  fill_uniform_fan(p.tensors.bwd_w_input, rng);
  fill_recurrent(p.tensors.bwd_w_recurrent, shape.hidden_units, rng);
  fill_uniform_fan(p.tensors.dense_kernel, rng);
  return p;
}

Eigen::MatrixXd lstm_forward(const ModelParams &params,
                             const Eigen::MatrixXd &x, Direction direction,
                             LstmCache *cache) {
  const int u = params.shape.hidden_units;
  if (x.cols() != params.shape.input_dim()) {
    throw DataError("lstm_forward: input has " + std::to_string(x.cols()) +
                    " columns, expected " +
                    std::to_string(params.shape.input_dim()));
  }
  const bool rev = direction == Direction::backward;
  const Eigen::MatrixXd &w_in =
      rev ? params.tensors.bwd_w_input : params.tensors.fwd_w_input;
  const Eigen::MatrixXd &w_rec =
      rev ? params.tensors.bwd_w_recurrent : params.tensors.fwd_w_recurrent;
  const Eigen::MatrixXd &bias =
      rev ? params.tensors.bwd_bias : params.tensors.fwd_bias;

  const Eigen::Index steps = x.rows();
  Eigen::MatrixXd xp = rev ? x.colwise().reverse().eval() : x;
  Eigen::MatrixXd z_in = xp * w_in;  // input projection for all timesteps

  LstmCache local;
  LstmCache &c = cache ? *cache : local;
  c.x = std::move(xp);
  c.gate_i.resize(steps, u);
  c.gate_f.resize(steps, u);
  c.gate_g.resize(steps, u);
  c.gate_o.resize(steps, u);
  c.cell.resize(steps, u);
  c.cell_tanh.resize(steps, u);
  c.hidden.resize(steps, u);

  Eigen::RowVectorXd h_prev = Eigen::RowVectorXd::Zero(u);
  Eigen::RowVectorXd c_prev = Eigen::RowVectorXd::Zero(u);
  for (Eigen::Index t = 0; t < steps; ++t) {
    Eigen::RowVectorXd z = z_in.row(t) + h_prev * w_rec + bias.row(0);
    Eigen::ArrayXd gi = sigmoid_array(z.segment(0, u).transpose().array());
    Eigen::ArrayXd gf = sigmoid_array(z.segment(u, u).transpose().array());
    Eigen::ArrayXd gg = z.segment(2 * u, u).transpose().array().tanh();
    Eigen::ArrayXd go = sigmoid_array(z.segment(3 * u, u).transpose().array());
    Eigen::ArrayXd cell = gf * c_prev.transpose().array() + gi * gg;
    Eigen::ArrayXd cell_t = cell.tanh();
    Eigen::ArrayXd hidden = go * cell_t;

    c.gate_i.row(t) = gi.matrix().transpose();
    c.gate_f.row(t) = gf.matrix().transpose();
    c.gate_g.row(t) = gg.matrix().transpose();
    c.gate_o.row(t) = go.matrix().transpose();
    c.cell.row(t) = cell.matrix().transpose();
    c.cell_tanh.row(t) = cell_t.matrix().transpose();
    c.hidden.row(t) = hidden.matrix().transpose();
    h_prev = c.hidden.row(t);
    c_prev = c.cell.row(t);
  }
  if (rev) return c.hidden.colwise().reverse();
  return c.hidden;
}

Eigen::MatrixXd avg_pool(const Eigen::MatrixXd &h, int pool, int stride) {
  if (pool <= 0 || stride <= 0) {
    throw DataError("avg_pool: pool and stride must be positive");
  }
  if (h.rows() < pool) {
    throw DataError("avg_pool: sequence length " + std::to_string(h.rows()) +
                    " shorter than pool size " + std::to_string(pool));
  }
  const Eigen::Index out_len = (h.rows() - pool) / stride + 1;
  Eigen::MatrixXd out(out_len, h.cols());
  for (Eigen::Index w = 0; w < out_len; ++w) {
    out.row(w) = h.middleRows(w * stride, pool).colwise().mean();
  }
  return out;
}

Eigen::RowVectorXd forward(const ModelParams &params, const Eigen::MatrixXd &x,
                           bool training, Rng &rng, double dropout_rate,
                           ForwardCache *cache) {
  const ShapeMeta &s = params.shape;
  if (x.rows() != s.seq_len || x.cols() != s.input_dim()) {
    throw DataError("forward: input " + std::to_string(x.rows()) + "x" +
                    std::to_string(x.cols()) + ", expected " +
                    std::to_string(s.seq_len) + "x" +
                    std::to_string(s.input_dim()));
  }
  ForwardCache local;
  ForwardCache &c = cache ? *cache : local;
  c.training = training;

  Eigen::MatrixXd h_fwd = lstm_forward(params, x, Direction::forward, &c.fwd);
  Eigen::MatrixXd h_bwd = lstm_forward(params, x, Direction::backward, &c.bwd);

  Eigen::MatrixXd concat(s.seq_len, 2 * s.hidden_units);
  concat << h_fwd, h_bwd;
  c.pooled = avg_pool(concat, s.pool_size, s.pool_stride);

  const int flat = s.flat_dim();
  Eigen::RowVectorXd flat_vec(flat);
  const int cols = 2 * s.hidden_units;
  for (int r = 0; r < s.pooled_len(); ++r) {
    flat_vec.segment(r * cols, cols) = c.pooled.row(r);
  }

  c.dropout_mask = Eigen::RowVectorXd::Ones(flat);
  if (training && dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - dropout_rate);
    for (int k = 0; k < flat; ++k) {
      c.dropout_mask[k] = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
    }
  }
  c.flat_dropped = flat_vec.cwiseProduct(c.dropout_mask);

  return c.flat_dropped * params.tensors.dense_kernel +
         params.tensors.dense_bias.row(0);
}

Eigen::RowVectorXd predict_scores(const ModelParams &params,
                                  const Eigen::MatrixXd &x) {
  Rng rng(0);  // inference consumes no randomness
  Eigen::RowVectorXd scores = forward(params, x, false, rng, 0.0);
  if (params.output == OutputKind::sigmoid) {
    scores = scores.unaryExpr([](double v) { return sigmoid(v); });
  }
  return scores;
}

Eigen::RowVectorXd predict(const Eigen::RowVectorXd &scores, double threshold) {
  Eigen::RowVectorXd labels(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    labels[i] = scores[i] >= threshold ? 1.0 : 0.0;
  }
  return labels;
}

namespace {

// Backpropagation through one direction; d_hidden arrives in processing
// order and gradients accumulate into the direction's tensors.
void lstm_backward(const Eigen::MatrixXd &w_rec, const LstmCache &c,
                   const Eigen::MatrixXd &d_hidden, Eigen::MatrixXd &g_w_in,
                   Eigen::MatrixXd &g_w_rec, Eigen::MatrixXd &g_bias) {
  const Eigen::Index steps = c.hidden.rows();
  const Eigen::Index u = c.hidden.cols();
  Eigen::MatrixXd dz(steps, 4 * u);
  Eigen::ArrayXd dh_next = Eigen::ArrayXd::Zero(u);
  Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(u);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    Eigen::ArrayXd dh = d_hidden.row(t).transpose().array() + dh_next;
    Eigen::ArrayXd gi = c.gate_i.row(t).transpose().array();
    Eigen::ArrayXd gf = c.gate_f.row(t).transpose().array();
    Eigen::ArrayXd gg = c.gate_g.row(t).transpose().array();
    Eigen::ArrayXd go = c.gate_o.row(t).transpose().array();
    Eigen::ArrayXd ct = c.cell_tanh.row(t).transpose().array();

    Eigen::ArrayXd dc = dh * go * (1.0 - ct * ct) + dc_next;
    Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(u);
    if (t > 0) c_prev = c.cell.row(t - 1).transpose().array();
    Eigen::ArrayXd dzi = dc * gg * gi * (1.0 - gi);
    Eigen::ArrayXd dzf = dc * c_prev * gf * (1.0 - gf);
    Eigen::ArrayXd dzg = dc * gi * (1.0 - gg * gg);
    Eigen::ArrayXd dzo = dh * ct * go * (1.0 - go);

    dz.row(t).segment(0, u) = dzi.matrix().transpose();
    dz.row(t).segment(u, u) = dzf.matrix().transpose();
    dz.row(t).segment(2 * u, u) = dzg.matrix().transpose();
    dz.row(t).segment(3 * u, u) = dzo.matrix().transpose();

    dh_next = (dz.row(t) * w_rec.transpose()).transpose().array();
    dc_next = dc * gf;
  }
  g_w_in.noalias() += c.x.transpose() * dz;
  // hidden states shifted one step back feed the recurrent kernel
  if (steps > 1) {
    g_w_rec.noalias() += c.hidden.topRows(steps - 1).transpose() * dz.bottomRows(steps - 1);
  }
  g_bias.row(0) += dz.colwise().sum();
}

}  // namespace

void backward(const ModelParams &params, const ForwardCache &cache,
              const Eigen::RowVectorXd &dscores, ModelGrads &grads) {
  const ShapeMeta &s = params.shape;
  if (dscores.size() != s.n_relations) {
    throw DataError("backward: dscores length " +
                    std::to_string(dscores.size()) + ", expected " +
                    std::to_string(s.n_relations));
  }
  if (cache.flat_dropped.size() != s.flat_dim() ||
      cache.fwd.hidden.rows() != s.seq_len) {
    throw DataError("backward: cache does not match model shape");
  }

  grads.dense_kernel.noalias() += cache.flat_dropped.transpose() * dscores;
  grads.dense_bias.row(0) += dscores;

  Eigen::RowVectorXd d_flat =
      (dscores * params.tensors.dense_kernel.transpose())
          .cwiseProduct(cache.dropout_mask);

  const int cols = 2 * s.hidden_units;
  Eigen::MatrixXd d_pooled(s.pooled_len(), cols);
  for (int r = 0; r < s.pooled_len(); ++r) {
    d_pooled.row(r) = d_flat.segment(r * cols, cols);
  }

  // pooling distributes each window mean uniformly over its rows
  Eigen::MatrixXd d_concat = Eigen::MatrixXd::Zero(s.seq_len, cols);
  const double inv_pool = 1.0 / s.pool_size;
  for (int w = 0; w < s.pooled_len(); ++w) {
    d_concat.middleRows(w * s.pool_stride, s.pool_size).rowwise() +=
        d_pooled.row(w) * inv_pool;
  }

  Eigen::MatrixXd d_h_fwd = d_concat.leftCols(s.hidden_units);
  Eigen::MatrixXd d_h_bwd =
      d_concat.rightCols(s.hidden_units).colwise().reverse();

  lstm_backward(params.tensors.fwd_w_recurrent, cache.fwd, d_h_fwd,
                grads.fwd_w_input, grads.fwd_w_recurrent, grads.fwd_bias);
  lstm_backward(params.tensors.bwd_w_recurrent, cache.bwd, d_h_bwd,
                grads.bwd_w_input, grads.bwd_w_recurrent, grads.bwd_bias);
}

}  // namespace mrca
