#include "balds/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "balds/rng.hpp"

namespace balds {

namespace {

Matrix apply_activation(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::Identity:
      return pre;
    case Activation::ReLU:
      return pre.cwiseMax(0.0);
    case Activation::Tanh:
      return pre.array().tanh().matrix();
  }
  return pre;
}

// d(act)/d(pre) given pre-activation and post-activation values.
Matrix activation_grad(Activation act, const Matrix& pre, const Matrix& out) {
  switch (act) {
    case Activation::Identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::ReLU:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh:
      return (1.0 - out.array().square()).matrix();
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

Matrix apply_dropout(const Matrix& in, const DropoutSpec& spec, const Vector& mask) {
  if (spec.p >= 1.0) return Matrix::Zero(in.rows(), in.cols());
  double inv_keep = 1.0 / (1.0 - spec.p);
  return in.array().rowwise() * (mask.transpose().array() * inv_keep);
}

struct GateSlices {
  Matrix i, f, g, o;
};

GateSlices split_gates(const Matrix& gates, int hidden) {
  return {gates.middleCols(0, hidden), gates.middleCols(hidden, hidden),
          gates.middleCols(2 * hidden, hidden), gates.middleCols(3 * hidden, hidden)};
}

}  // namespace

int NetworkSpec::input_dim() const {
  for (const auto& layer : layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) return d->in;
    if (const auto* l = std::get_if<LstmSpec>(&layer)) return l->in;
  }
  throw ConfigError("network has no parameterized layer");
}

int NetworkSpec::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (const auto* d = std::get_if<DenseSpec>(&*it)) return d->out;
    if (const auto* l = std::get_if<LstmSpec>(&*it)) return l->hidden;
  }
  throw ConfigError("network has no parameterized layer");
}

bool NetworkSpec::recurrent() const {
  return std::any_of(layers.begin(), layers.end(),
                     [](const LayerSpec& l) { return std::holds_alternative<LstmSpec>(l); });
}

int NetworkSpec::width_entering(std::size_t layer_index) const {
  int width = input_dim();
  for (std::size_t i = 0; i < layers.size() && i < layer_index; ++i) {
    if (const auto* d = std::get_if<DenseSpec>(&layers[i]))
      width = d->out;
    else if (const auto* l = std::get_if<LstmSpec>(&layers[i]))
      width = l->hidden;
  }
  return width;
}

std::vector<std::size_t> NetworkSpec::dropout_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (std::holds_alternative<DropoutSpec>(layers[i])) out.push_back(i);
  return out;
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ConfigError("empty network spec");
  int width = input_dim();
  int lstm_count = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (const auto* d = std::get_if<DenseSpec>(&layers[i])) {
      if (d->in != width)
        throw ConfigError("layer " + std::to_string(i) + ": dense expects width " +
                          std::to_string(d->in) + " but gets " + std::to_string(width));
      if (d->out <= 0) throw ConfigError("dense output width must be positive");
      width = d->out;
    } else if (const auto* l = std::get_if<LstmSpec>(&layers[i])) {
      if (l->in != width)
        throw ConfigError("layer " + std::to_string(i) + ": lstm expects width " +
                          std::to_string(l->in) + " but gets " + std::to_string(width));
      if (l->hidden <= 0) throw ConfigError("lstm hidden width must be positive");
      width = l->hidden;
      ++lstm_count;
    } else if (const auto* p = std::get_if<DropoutSpec>(&layers[i])) {
      if (!(p->p >= 0.0 && p->p <= 1.0))
        throw ConfigError("dropout probability outside [0,1]");
    }
  }
  if (lstm_count > 1) throw ConfigError("at most one lstm layer is supported");
}

NetworkSpec NetworkSpec::frame_model(int feature_dim, int classes, double dropout_p,
                                     HeadKind head) {
  NetworkSpec spec;
  spec.layers = {DenseSpec{feature_dim, 64, Activation::ReLU}, DropoutSpec{dropout_p},
                 DenseSpec{64, 32, Activation::ReLU}, DropoutSpec{dropout_p},
                 DenseSpec{32, classes, Activation::Identity}};
  spec.head = head;
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::sequence_model(int feature_dim, int classes, double dropout_p) {
  NetworkSpec spec;
  spec.layers = {DenseSpec{feature_dim, 64, Activation::ReLU}, DropoutSpec{dropout_p},
                 DenseSpec{64, 32, Activation::ReLU}, DropoutSpec{dropout_p},
                 LstmSpec{32, 32}, DropoutSpec{dropout_p},
                 DenseSpec{32, classes, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  spec.validate();
  return spec;
}

DropoutMaskSet sample_masks(const NetworkSpec& spec, std::uint64_t seed, std::int64_t pass) {
  DropoutMaskSet set;
  set.seed = seed;
  set.pass = pass;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto* drop = std::get_if<DropoutSpec>(&spec.layers[i]);
    if (!drop) continue;
    int width = spec.width_entering(i);
    Vector mask(width);
    for (int e = 0; e < width; ++e) {
      double u = counter_uniform(seed, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(pass), static_cast<std::uint64_t>(e));
      mask[e] = (u >= drop->p) ? 1.0 : 0.0;
    }
    set.masks.push_back(std::move(mask));
  }
  return set;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : values)
    for (const auto& blob : layer) n += static_cast<std::size_t>(blob.size());
  return n;
}

ParameterStore init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(hash_combine(seed, 0x1217u));
  ParameterStore store;
  for (const auto& layer : spec.layers) {
    std::vector<Matrix> slots;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      double limit = std::sqrt(6.0 / d->in);
      Matrix w(d->out, d->in);
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
      slots.push_back(std::move(w));
      slots.push_back(Matrix::Zero(d->out, 1));
    } else if (const auto* l = std::get_if<LstmSpec>(&layer)) {
      double lim_x = std::sqrt(6.0 / l->in);
      double lim_h = std::sqrt(6.0 / l->hidden);
      Matrix wx(4 * l->hidden, l->in), wh(4 * l->hidden, l->hidden);
      for (int r = 0; r < wx.rows(); ++r)
        for (int c = 0; c < wx.cols(); ++c) wx(r, c) = rng.uniform(-lim_x, lim_x);
      for (int r = 0; r < wh.rows(); ++r)
        for (int c = 0; c < wh.cols(); ++c) wh(r, c) = rng.uniform(-lim_h, lim_h);
      Matrix b = Matrix::Zero(4 * l->hidden, 1);
      b.block(l->hidden, 0, l->hidden, 1).setOnes();  // forget gate bias
      slots.push_back(std::move(wx));
      slots.push_back(std::move(wh));
      slots.push_back(std::move(b));
    }
    store.values.push_back(std::move(slots));
  }
  store.m = zero_blocks_like(store.values);
  store.v = zero_blocks_like(store.values);
  store.step = 0;
  return store;
}

ParamBlocks zero_blocks_like(const ParamBlocks& shape) {
  ParamBlocks out;
  out.reserve(shape.size());
  for (const auto& layer : shape) {
    std::vector<Matrix> slots;
    slots.reserve(layer.size());
    for (const auto& blob : layer) slots.push_back(Matrix::Zero(blob.rows(), blob.cols()));
    out.push_back(std::move(slots));
  }
  return out;
}

void accumulate(ParamBlocks& into, const ParamBlocks& grads) {
  for (std::size_t i = 0; i < into.size(); ++i)
    for (std::size_t j = 0; j < into[i].size(); ++j) into[i][j] += grads[i][j];
}

void scale_blocks(ParamBlocks& blocks, double factor) {
  for (auto& layer : blocks)
    for (auto& blob : layer) blob *= factor;
}

std::size_t block_count(const ParamBlocks& blocks) {
  std::size_t n = 0;
  for (const auto& layer : blocks)
    for (const auto& blob : layer) n += static_cast<std::size_t>(blob.size());
  return n;
}

Vector flatten(const ParamBlocks& blocks) {
  Vector flat(static_cast<Eigen::Index>(block_count(blocks)));
  Eigen::Index at = 0;
  for (const auto& layer : blocks)
    for (const auto& blob : layer) {
      flat.segment(at, blob.size()) = Eigen::Map<const Vector>(blob.data(), blob.size());
      at += blob.size();
    }
  return flat;
}

void unflatten_into(ParamBlocks& blocks, const Eigen::Ref<const Vector>& flat) {
  Eigen::Index at = 0;
  for (auto& layer : blocks)
    for (auto& blob : layer) {
      Eigen::Map<Vector>(blob.data(), blob.size()) = flat.segment(at, blob.size());
      at += blob.size();
    }
}

LstmState zero_state(const LstmSpec& spec) {
  return {Vector::Zero(spec.hidden), Vector::Zero(spec.hidden)};
}

std::pair<LstmState, Vector> lstm_step(const LstmSpec& spec, const std::vector<Matrix>& params,
                                       const LstmState& state,
                                       const Eigen::Ref<const Vector>& input) {
  if (input.size() != spec.in || state.hidden.size() != spec.hidden ||
      state.cell.size() != spec.hidden)
    throw ConfigError("lstm_step: state or input width mismatch");
  const Matrix& wx = params[0];
  const Matrix& wh = params[1];
  const Matrix& b = params[2];
  Vector gates = wx * input + wh * state.hidden + b.col(0);
  int h = spec.hidden;
  Vector gi = sigmoid_elems(gates.segment(0, h));
  Vector gf = sigmoid_elems(gates.segment(h, h));
  Vector gg = gates.segment(2 * h, h).array().tanh();
  Vector go = sigmoid_elems(gates.segment(3 * h, h));
  LstmState next;
  next.cell = gf.cwiseProduct(state.cell) + gi.cwiseProduct(gg);
  next.hidden = go.cwiseProduct(next.cell.array().tanh().matrix());
  return {next, next.hidden};
}

Matrix softmax_rows(const Eigen::Ref<const Matrix>& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double max = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).array() - max).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return out;
}

Matrix sigmoid_elems(const Eigen::Ref<const Matrix>& logits) {
  // Branch on sign so large |z| never overflows exp.
  return logits.unaryExpr([](double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
  });
}

namespace {

// Shared by the frame path (batch=N, max_len=1) and the sequence path.
// `stack` is time-major: row t*batch + b is step t of sequence b.
Matrix run_forward(const NetworkSpec& spec, const ParameterStore& params, Matrix stack, int batch,
                   int max_len, const DropoutMaskSet* masks, ForwardCache* cache) {
  if (masks && masks->masks.size() != spec.dropout_layers().size())
    throw ConfigError("mask set does not match the network's dropout layers");
  if (stack.cols() != spec.input_dim())
    throw ConfigError("input width " + std::to_string(stack.cols()) +
                      " does not match network input " + std::to_string(spec.input_dim()));

  std::size_t mask_at = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (cache) cache->layer_in.push_back(stack);
    Matrix out;
    Matrix pre;
    if (const auto* d = std::get_if<DenseSpec>(&spec.layers[i])) {
      const auto& slots = params.values[i];
      pre = stack * slots[0].transpose();
      pre.rowwise() += slots[1].col(0).transpose();
      out = apply_activation(d->act, pre);
    } else if (const auto* l = std::get_if<LstmSpec>(&spec.layers[i])) {
      const auto& slots = params.values[i];
      int h = l->hidden;
      Matrix hs = Matrix::Zero(batch, h);
      Matrix cs = Matrix::Zero(batch, h);
      out.resize(stack.rows(), h);
      for (int t = 0; t < max_len; ++t) {
        Matrix xt = stack.middleRows(static_cast<Eigen::Index>(t) * batch, batch);
        Matrix gates = xt * slots[0].transpose() + hs * slots[1].transpose();
        gates.rowwise() += slots[2].col(0).transpose();
        GateSlices g = split_gates(gates, h);
        Matrix gi = sigmoid_elems(g.i);
        Matrix gf = sigmoid_elems(g.f);
        Matrix gg = g.g.array().tanh().matrix();
        Matrix go = sigmoid_elems(g.o);
        cs = gf.cwiseProduct(cs) + gi.cwiseProduct(gg);
        Matrix tc = cs.array().tanh().matrix();
        hs = go.cwiseProduct(tc);
        out.middleRows(static_cast<Eigen::Index>(t) * batch, batch) = hs;
        if (cache) {
          cache->lstm.x.push_back(std::move(xt));
          cache->lstm.gi.push_back(std::move(gi));
          cache->lstm.gf.push_back(std::move(gf));
          cache->lstm.gg.push_back(std::move(gg));
          cache->lstm.go.push_back(std::move(go));
          cache->lstm.c.push_back(cs);
          cache->lstm.h.push_back(hs);
          cache->lstm.tanh_c.push_back(std::move(tc));
        }
      }
    } else {
      const auto& drop = std::get<DropoutSpec>(spec.layers[i]);
      if (masks)
        out = apply_dropout(stack, drop, masks->masks[mask_at]);
      else
        out = stack;
      ++mask_at;
    }
    if (cache) {
      cache->dense_pre.push_back(std::holds_alternative<DenseSpec>(spec.layers[i]) ? pre
                                                                                   : Matrix());
      cache->layer_out.push_back(out);
    }
    stack = std::move(out);
  }

  Matrix head = spec.head == HeadKind::Softmax ? softmax_rows(stack) : sigmoid_elems(stack);
  ensure_finite(head, "network head output");
  if (cache) {
    cache->head_output = head;
    cache->batch = batch;
    cache->max_len = max_len;
    if (masks) {
      cache->has_masks = true;
      cache->masks = *masks;
    }
  }
  return head;
}

}  // namespace

Matrix forward(const NetworkSpec& spec, const ParameterStore& params,
               const Eigen::Ref<const Matrix>& input, const DropoutMaskSet* masks,
               ForwardCache* cache) {
  if (cache) *cache = ForwardCache{};
  return run_forward(spec, params, input, static_cast<int>(input.rows()), 1, masks, cache);
}

std::vector<Matrix> forward_sequences(const NetworkSpec& spec, const ParameterStore& params,
                                      const std::vector<Matrix>& seqs, const DropoutMaskSet* masks,
                                      ForwardCache* cache) {
  if (seqs.empty()) throw ConfigError("forward_sequences: empty batch");
  int batch = static_cast<int>(seqs.size());
  int max_len = 0;
  for (const auto& s : seqs) max_len = std::max(max_len, static_cast<int>(s.rows()));
  int feat = static_cast<int>(seqs[0].cols());

  Matrix stack = Matrix::Zero(static_cast<Eigen::Index>(batch) * max_len, feat);
  for (int b = 0; b < batch; ++b) {
    if (seqs[b].cols() != feat) throw ConfigError("forward_sequences: inconsistent feature width");
    for (int t = 0; t < seqs[b].rows(); ++t)
      stack.row(static_cast<Eigen::Index>(t) * batch + b) = seqs[b].row(t);
  }

  ForwardCache local;
  ForwardCache* use = cache ? cache : &local;
  *use = ForwardCache{};
  use->is_sequence = true;
  for (const auto& s : seqs) use->lengths.push_back(static_cast<int>(s.rows()));
  Matrix head = run_forward(spec, params, std::move(stack), batch, max_len, masks,
                            cache ? cache : nullptr);

  std::vector<Matrix> outputs;
  outputs.reserve(seqs.size());
  for (int b = 0; b < batch; ++b) {
    Matrix out(seqs[b].rows(), head.cols());
    for (int t = 0; t < seqs[b].rows(); ++t)
      out.row(t) = head.row(static_cast<Eigen::Index>(t) * batch + b);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

Matrix forward_sequence(const NetworkSpec& spec, const ParameterStore& params,
                        const Eigen::Ref<const Matrix>& seq, const DropoutMaskSet* masks,
                        ForwardCache* cache) {
  std::vector<Matrix> one{seq};
  return forward_sequences(spec, params, one, masks, cache)[0];
}

Matrix head_backward(HeadKind head, const Eigen::Ref<const Matrix>& head_output,
                     const Eigen::Ref<const Matrix>& d_head_output) {
  if (head == HeadKind::Sigmoid)
    return d_head_output.array() * head_output.array() * (1.0 - head_output.array());
  // Softmax Jacobian per row: dz_j = p_j * (g_j - sum_k g_k p_k).
  Matrix dz(head_output.rows(), head_output.cols());
  for (Eigen::Index r = 0; r < head_output.rows(); ++r) {
    double dot = d_head_output.row(r).dot(head_output.row(r));
    dz.row(r) = head_output.row(r).cwiseProduct(
        (d_head_output.row(r).array() - dot).matrix());
  }
  return dz;
}

namespace {

ParamBlocks run_backward(const NetworkSpec& spec, const ParameterStore& params,
                         const ForwardCache& cache, Matrix d_stack, const DropoutMaskSet* masks) {
  ParamBlocks grads = zero_blocks_like(params.values);
  int batch = cache.batch;
  int max_len = cache.max_len;

  // Count dropout layers seen before each index so masks can be replayed.
  std::vector<std::size_t> mask_index(spec.layers.size(), 0);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    mask_index[i] = seen;
    if (std::holds_alternative<DropoutSpec>(spec.layers[i])) ++seen;
  }

  for (std::size_t ri = spec.layers.size(); ri-- > 0;) {
    if (const auto* d = std::get_if<DenseSpec>(&spec.layers[ri])) {
      const Matrix& pre = cache.dense_pre[ri];
      const Matrix& out = cache.layer_out[ri];
      const Matrix& in = cache.layer_in[ri];
      Matrix d_pre = d_stack.cwiseProduct(activation_grad(d->act, pre, out));
      grads[ri][0] = d_pre.transpose() * in;
      grads[ri][1] = d_pre.colwise().sum().transpose();
      d_stack = d_pre * params.values[ri][0];
    } else if (const auto* l = std::get_if<LstmSpec>(&spec.layers[ri])) {
      const auto& slots = params.values[ri];
      const auto& lc = cache.lstm;
      int h = l->hidden;
      Matrix d_h = Matrix::Zero(batch, h);
      Matrix d_c = Matrix::Zero(batch, h);
      Matrix d_wx = Matrix::Zero(4 * h, l->in);
      Matrix d_wh = Matrix::Zero(4 * h, h);
      Matrix d_b = Matrix::Zero(4 * h, 1);
      Matrix d_in(d_stack.rows(), l->in);
      for (int t = max_len - 1; t >= 0; --t) {
        d_h += d_stack.middleRows(static_cast<Eigen::Index>(t) * batch, batch);
        const Matrix& tc = lc.tanh_c[t];
        Matrix d_o = d_h.cwiseProduct(tc);
        d_c += d_h.cwiseProduct(lc.go[t]).cwiseProduct(
            (1.0 - tc.array().square()).matrix());
        Matrix c_prev = t > 0 ? lc.c[t - 1] : Matrix::Zero(batch, h);
        Matrix h_prev = t > 0 ? lc.h[t - 1] : Matrix::Zero(batch, h);
        Matrix d_f = d_c.cwiseProduct(c_prev);
        Matrix d_i = d_c.cwiseProduct(lc.gg[t]);
        Matrix d_g = d_c.cwiseProduct(lc.gi[t]);
        Matrix d_zi = d_i.cwiseProduct(lc.gi[t]).cwiseProduct((1.0 - lc.gi[t].array()).matrix());
        Matrix d_zf = d_f.cwiseProduct(lc.gf[t]).cwiseProduct((1.0 - lc.gf[t].array()).matrix());
        Matrix d_zg = d_g.cwiseProduct((1.0 - lc.gg[t].array().square()).matrix());
        Matrix d_zo = d_o.cwiseProduct(lc.go[t]).cwiseProduct((1.0 - lc.go[t].array()).matrix());
        Matrix d_gates(batch, 4 * h);
        d_gates << d_zi, d_zf, d_zg, d_zo;
        d_wx += d_gates.transpose() * lc.x[t];
        d_wh += d_gates.transpose() * h_prev;
        d_b += d_gates.colwise().sum().transpose();
        d_in.middleRows(static_cast<Eigen::Index>(t) * batch, batch) = d_gates * slots[0];
        d_h = d_gates * slots[1];
        d_c = d_c.cwiseProduct(lc.gf[t]);
      }
      grads[ri][0] = std::move(d_wx);
      grads[ri][1] = std::move(d_wh);
      grads[ri][2] = std::move(d_b);
      d_stack = std::move(d_in);
    } else {
      const auto& drop = std::get<DropoutSpec>(spec.layers[ri]);
      if (masks) {
        if (drop.p >= 1.0) {
          d_stack.setZero();
        } else {
          double inv_keep = 1.0 / (1.0 - drop.p);
          d_stack = d_stack.array().rowwise() *
                    (masks->masks[mask_index[ri]].transpose().array() * inv_keep);
        }
      }
    }
  }
  return grads;
}

}  // namespace

ParamBlocks backward(const NetworkSpec& spec, const ParameterStore& params,
                     const ForwardCache& cache, const Eigen::Ref<const Matrix>& d_head_output) {
  if (cache.layer_out.empty()) throw ConfigError("backward: forward cache missing");
  Matrix d_logits = head_backward(spec.head, cache.head_output, d_head_output);
  return run_backward(spec, params, cache, std::move(d_logits),
                      cache.has_masks ? &cache.masks : nullptr);
}

ParamBlocks backward_sequences(const NetworkSpec& spec, const ParameterStore& params,
                               const ForwardCache& cache, const std::vector<Matrix>& d_outputs) {
  if (!cache.is_sequence) throw ConfigError("backward_sequences: cache is not from a sequence pass");
  if (static_cast<int>(d_outputs.size()) != cache.batch)
    throw ConfigError("backward_sequences: gradient batch size mismatch");
  // Restack per-sequence gradients time-major, zero on the padding rows.
  Matrix d_head = Matrix::Zero(cache.head_output.rows(), cache.head_output.cols());
  for (int b = 0; b < cache.batch; ++b) {
    if (d_outputs[b].rows() != cache.lengths[b])
      throw ConfigError("backward_sequences: gradient length mismatch");
    for (int t = 0; t < cache.lengths[b]; ++t)
      d_head.row(static_cast<Eigen::Index>(t) * cache.batch + b) = d_outputs[b].row(t);
  }
  return backward(spec, params, cache, d_head);
}

}  // namespace balds
