#pragma once

#include <cstdint>
#include <vector>

#include "balds/net.hpp"

namespace balds {

// T stochastic forward passes for one item; row t is the head output of pass
// t. The Monte-Carlo approximation of the posterior predictive.
struct PosteriorSamples {
  Matrix samples;  // T x C
  HeadKind head = HeadKind::Softmax;

  int passes() const { return static_cast<int>(samples.rows()); }
  int classes() const { return static_cast<int>(samples.cols()); }
};

// T passes over a whole sequence: passes[t] is L x C. Within one pass every
// time step reuses the same dropout masks.
struct SequencePosterior {
  std::vector<Matrix> passes;  // T entries of L x C
  HeadKind head = HeadKind::Softmax;

  int pass_count() const { return static_cast<int>(passes.size()); }
  int length() const { return passes.empty() ? 0 : static_cast<int>(passes[0].rows()); }
  // T x C slice for one frame of the sequence.
  PosteriorSamples frame(int index) const;
};

// Pass t uses masks keyed by (seed, t).
PosteriorSamples mc_forward(const NetworkSpec& spec, const ParameterStore& params,
                            const Eigen::Ref<const Vector>& input, int passes,
                            std::uint64_t seed);

// Batched variant: rows of `inputs` are items; result[n] equals what
// mc_forward would produce for row n (masks do not depend on the item).
std::vector<PosteriorSamples> mc_forward_batch(const NetworkSpec& spec,
                                               const ParameterStore& params,
                                               const Eigen::Ref<const Matrix>& inputs, int passes,
                                               std::uint64_t seed);

SequencePosterior mc_forward_sequence(const NetworkSpec& spec, const ParameterStore& params,
                                      const Eigen::Ref<const Matrix>& seq, int passes,
                                      std::uint64_t seed);

// Scores many sequences per pass in one padded batch; result[b] matches
// mc_forward_sequence for seqs[b] up to floating-point summation order.
std::vector<SequencePosterior> mc_forward_sequences(const NetworkSpec& spec,
                                                    const ParameterStore& params,
                                                    const std::vector<Matrix>& seqs, int passes,
                                                    std::uint64_t seed);

// Arithmetic mean over the pass axis.
Vector posterior_mean(const PosteriorSamples& samples);
Matrix posterior_mean(const SequencePosterior& samples);

}  // namespace balds
