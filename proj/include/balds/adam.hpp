#pragma once

#include "balds/net.hpp"

namespace balds {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // classic L2, added to the gradient (coupled)
};

// Standard bias-corrected Adam step. L2 decay enters the gradient before the
// moment updates; `params.step` advances by one.
void adam_step(ParameterStore& params, const ParamBlocks& grads, const AdamConfig& cfg);

}  // namespace balds
