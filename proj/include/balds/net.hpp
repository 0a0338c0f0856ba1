#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "balds/common.hpp"

namespace balds {

enum class Activation { Identity, ReLU, Tanh };
enum class HeadKind { Sigmoid, Softmax };

struct DenseSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::Identity;
};

struct LstmSpec {
  int in = 0;
  int hidden = 0;
};

struct DropoutSpec {
  double p = 0.5;
};

using LayerSpec = std::variant<DenseSpec, LstmSpec, DropoutSpec>;

// Layer stack plus output nonlinearity. The final Dense produces the class
// logits; `head` maps them to probabilities.
struct NetworkSpec {
  std::vector<LayerSpec> layers;
  HeadKind head = HeadKind::Softmax;

  int input_dim() const;
  int output_dim() const;
  bool recurrent() const;
  // Width of the tensor entering layer i (equals the mask width for Dropout).
  int width_entering(std::size_t layer_index) const;
  std::vector<std::size_t> dropout_layers() const;
  // Throws ConfigError on dimension mismatch, p outside [0,1], >1 Lstm layer.
  void validate() const;

  // Dense(F->64, ReLU), Dropout(p), Dense(64->32, ReLU), Dropout(p), Dense(32->C).
  static NetworkSpec frame_model(int feature_dim, int classes, double dropout_p, HeadKind head);
  // Same encoder with Lstm(32->32) and a dropout on its output before the head.
  static NetworkSpec sequence_model(int feature_dim, int classes, double dropout_p);
};

// Binary keep/drop masks, one vector per Dropout layer. Each entry is an
// independent Bernoulli(1-p) draw keyed by (seed, layer, pass, element), so
// scoring order and parallelism cannot change a sampled mask.
struct DropoutMaskSet {
  std::vector<Vector> masks;
  std::uint64_t seed = 0;
  std::int64_t pass = 0;
};

DropoutMaskSet sample_masks(const NetworkSpec& spec, std::uint64_t seed, std::int64_t pass);

// Parameter slots per layer:
//   Dense   -> { W (out x in), b (out x 1) }
//   Lstm    -> { Wx (4H x in), Wh (4H x H), b (4H x 1) }   gate rows: i, f, g, o
//   Dropout -> {}
using ParamBlocks = std::vector<std::vector<Matrix>>;

struct ParameterStore {
  ParamBlocks values;
  ParamBlocks m;  // Adam first moments, zero at init
  ParamBlocks v;  // Adam second moments, zero at init
  long step = 0;  // Adam step count, shared by all parameters

  std::size_t parameter_count() const;
};

// He-style uniform init (limit sqrt(6/fan_in)), biases zero except the LSTM
// forget gate bias which starts at 1. Deterministic in the seed.
ParameterStore init_parameters(const NetworkSpec& spec, std::uint64_t seed);

ParamBlocks zero_blocks_like(const ParamBlocks& shape);
void accumulate(ParamBlocks& into, const ParamBlocks& grads);
void scale_blocks(ParamBlocks& blocks, double factor);
std::size_t block_count(const ParamBlocks& blocks);
Vector flatten(const ParamBlocks& blocks);
void unflatten_into(ParamBlocks& blocks, const Eigen::Ref<const Vector>& flat);

struct LstmState {
  Vector hidden;
  Vector cell;
};

LstmState zero_state(const LstmSpec& spec);

// One cell update; `params` are the layer's {Wx, Wh, b} slots. Output equals
// the new hidden state.
std::pair<LstmState, Vector> lstm_step(const LstmSpec& spec, const std::vector<Matrix>& params,
                                       const LstmState& state, const Eigen::Ref<const Vector>& input);

// Cached intermediates of one forward pass, consumed by backward().
// For sequences the frame-local layers run on a time-major stack of
// (batch * max_len) rows; row t*batch + b is step t of sequence b.
struct LstmCache {
  std::vector<Matrix> x, gi, gf, gg, go, c, h, tanh_c;  // per step, batch x width
};

struct ForwardCache {
  std::vector<Matrix> layer_in;    // input rows per layer
  std::vector<Matrix> dense_pre;   // pre-activation per Dense layer (empty otherwise)
  std::vector<Matrix> layer_out;   // post-activation / post-dropout rows per layer
  Matrix head_output;
  bool is_sequence = false;
  int batch = 0;
  int max_len = 0;
  std::vector<int> lengths;
  LstmCache lstm;
  bool has_masks = false;          // masks replayed by backward()
  DropoutMaskSet masks;
};

// Batched forward; rows of `input` are independent items. masks == nullptr
// runs the deterministic pass (dropout disabled, no rescaling).
Matrix forward(const NetworkSpec& spec, const ParameterStore& params,
               const Eigen::Ref<const Matrix>& input, const DropoutMaskSet* masks,
               ForwardCache* cache = nullptr);

// Sequence batch: seqs[b] is L_b x F. The same mask set applies at every time
// step. Returns per-sequence L_b x C head outputs; state starts at zero.
std::vector<Matrix> forward_sequences(const NetworkSpec& spec, const ParameterStore& params,
                                      const std::vector<Matrix>& seqs, const DropoutMaskSet* masks,
                                      ForwardCache* cache = nullptr);

Matrix forward_sequence(const NetworkSpec& spec, const ParameterStore& params,
                        const Eigen::Ref<const Matrix>& seq, const DropoutMaskSet* masks,
                        ForwardCache* cache = nullptr);

// dLoss/dParameters given dLoss/dHeadOutput. Dropped units contribute zero.
ParamBlocks backward(const NetworkSpec& spec, const ParameterStore& params,
                     const ForwardCache& cache, const Eigen::Ref<const Matrix>& d_head_output);

// Sequence variant; d_outputs[b] is L_b x C aligned with forward_sequences.
// Runs full backpropagation through time.
ParamBlocks backward_sequences(const NetworkSpec& spec, const ParameterStore& params,
                               const ForwardCache& cache, const std::vector<Matrix>& d_outputs);

// dLoss/dHeadInput (logits) from dLoss/dHeadOutput (probabilities).
Matrix head_backward(HeadKind head, const Eigen::Ref<const Matrix>& head_output,
                     const Eigen::Ref<const Matrix>& d_head_output);

Matrix softmax_rows(const Eigen::Ref<const Matrix>& logits);
Matrix sigmoid_elems(const Eigen::Ref<const Matrix>& logits);

// Per-frame annotation flags m_i; length equals the sequence length.
using AnnotationMask = std::vector<std::uint8_t>;

}  // namespace balds
