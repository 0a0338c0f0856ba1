#pragma once

#include "balds/common.hpp"
#include "balds/net.hpp"

namespace balds {

inline constexpr double kDiceEps = 1e-6;

// Soft DICE, batch-aggregated per class, weight-normalized:
//   loss = sum_c w_c * (1 - 2*sum_n p*g / (sum_n p + sum_n g + eps)) / sum_c w_c
// Rows of pred/target are batch items, columns are classes. Result in [0, 1].
double dice_loss(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target,
                 const Eigen::Ref<const Vector>& class_weights);

// dLoss/dPred for dice_loss, same shape as pred.
Matrix dice_loss_grad(const Eigen::Ref<const Matrix>& pred,
                      const Eigen::Ref<const Matrix>& target,
                      const Eigen::Ref<const Vector>& class_weights);

// -log pred[target], with pred clamped at 1e-12.
double cross_entropy(const Eigen::Ref<const Vector>& pred, int target);

// Per-row cross entropy for a batch of softmax rows.
Vector cross_entropy_rows(const Eigen::Ref<const Matrix>& pred, const IntVector& targets);

// dLoss/dPred for the summed per-row cross entropy, optionally weighted per row.
Matrix cross_entropy_rows_grad(const Eigen::Ref<const Matrix>& pred, const IntVector& targets,
                               const Eigen::Ref<const Vector>& row_weights);

// Mean of m_i * cost_i over annotated frames; 0 when no frame is annotated.
// `annotated_count` (optional) reports how many frames carried gradient.
double masked_sequence_loss(const Eigen::Ref<const Vector>& costs, const AnnotationMask& mask,
                            int* annotated_count = nullptr);

}  // namespace balds
