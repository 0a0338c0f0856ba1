#pragma once

#include <cstdint>
#include <vector>

#include "balds/adam.hpp"
#include "balds/losses.hpp"
#include "balds/net.hpp"

namespace balds {

struct TrainOptions {
  int epoch_cap = 100;
  double cost_threshold = 5e-4;  // stop when mean per-example epoch cost drops below
  int batch_size = 128;          // frames per batch (videos are packed to this)
  AdamConfig adam;
  std::uint64_t seed = 0;  // epoch shuffles and per-batch dropout masks
};

struct TrainStats {
  int epochs_run = 0;
  double final_cost = 0.0;
  bool hit_cost_threshold = false;
};

// Multilabel frame task under the weighted DICE loss. Rows of
// features/labels are annotated frames.
TrainStats train_frame_model(const NetworkSpec& spec, ParameterStore& params,
                             const Matrix& features, const IntMatrix& labels,
                             const Vector& class_weights, const TrainOptions& options);

// One (possibly partially) annotated video: targets for frames with mask=0
// are placeholders and never contribute cost or gradient.
struct SequenceExample {
  Matrix features;  // L x F
  IntVector targets;
  AnnotationMask mask;
};

// Phase task: full BPTT over video minibatches with the masked cross-entropy
// cost, normalized by the number of annotated frames.
TrainStats train_sequence_model(const NetworkSpec& spec, ParameterStore& params,
                                const std::vector<SequenceExample>& examples,
                                const TrainOptions& options);

// Inverse class frequency over the labeled frames, for the DICE weights.
Vector inverse_frequency_weights(const IntMatrix& labels);

}  // namespace balds
