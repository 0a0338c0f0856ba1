#include "balds/adam.hpp"

#include <cmath>

namespace balds {

void adam_step(ParameterStore& params, const ParamBlocks& grads, const AdamConfig& cfg) {
  if (grads.size() != params.values.size())
    throw ConfigError("adam_step: gradient layout mismatch");
  params.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(params.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(params.step));
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    for (std::size_t j = 0; j < params.values[i].size(); ++j) {
      Matrix g = grads[i][j];
      if (cfg.weight_decay != 0.0) g += cfg.weight_decay * params.values[i][j];
      Matrix& m = params.m[i][j];
      Matrix& v = params.v[i][j];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      Matrix m_hat = m / bc1;
      Matrix v_hat = v / bc2;
      params.values[i][j].array() -=
          cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.eps);
      ensure_finite(params.values[i][j], "adam-updated parameters");
    }
  }
}

}  // namespace balds
