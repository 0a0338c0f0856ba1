#include "balds/losses.hpp"

#include <cmath>
#include <string>

namespace balds {

namespace {

void check_dice_args(const Eigen::Ref<const Matrix>& pred,
                     const Eigen::Ref<const Matrix>& target,
                     const Eigen::Ref<const Vector>& class_weights) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DataError("dice_loss: pred and target shapes differ");
  if (class_weights.size() != pred.cols())
    throw DataError("dice_loss: class weight count does not match classes");
  if ((class_weights.array() < 0.0).any() || class_weights.sum() <= 0.0)
    throw DataError("dice_loss: class weights must be nonnegative and not all zero");
}

}  // namespace

double dice_loss(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target,
                 const Eigen::Ref<const Vector>& class_weights) {
  check_dice_args(pred, target, class_weights);
  double total_weight = class_weights.sum();
  double loss = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    double inter = pred.col(c).dot(target.col(c));
    double denom = pred.col(c).sum() + target.col(c).sum() + kDiceEps;
    loss += class_weights[c] * (1.0 - 2.0 * inter / denom);
  }
  loss /= total_weight;
  ensure_finite(loss, "dice loss");
  return loss;
}

Matrix dice_loss_grad(const Eigen::Ref<const Matrix>& pred,
                      const Eigen::Ref<const Matrix>& target,
                      const Eigen::Ref<const Vector>& class_weights) {
  check_dice_args(pred, target, class_weights);
  double total_weight = class_weights.sum();
  Matrix grad(pred.rows(), pred.cols());
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    double inter = pred.col(c).dot(target.col(c));
    double denom = pred.col(c).sum() + target.col(c).sum() + kDiceEps;
    // d/dp_nc of (1 - 2*inter/denom) = -2*(g_nc*denom - inter) / denom^2
    grad.col(c) = (class_weights[c] / total_weight) * (-2.0) *
                  (target.col(c).array() * denom - inter).matrix() / (denom * denom);
  }
  return grad;
}

double cross_entropy(const Eigen::Ref<const Vector>& pred, int target) {
  if (target < 0 || target >= pred.size())
    throw DataError("cross_entropy: target class " + std::to_string(target) + " out of range");
  return -std::log(std::max(pred[target], 1e-12));
}

Vector cross_entropy_rows(const Eigen::Ref<const Matrix>& pred, const IntVector& targets) {
  if (targets.size() != pred.rows())
    throw DataError("cross_entropy_rows: row/target count mismatch");
  Vector costs(pred.rows());
  for (Eigen::Index r = 0; r < pred.rows(); ++r) costs[r] = cross_entropy(pred.row(r), targets[r]);
  return costs;
}

Matrix cross_entropy_rows_grad(const Eigen::Ref<const Matrix>& pred, const IntVector& targets,
                               const Eigen::Ref<const Vector>& row_weights) {
  if (targets.size() != pred.rows() || row_weights.size() != pred.rows())
    throw DataError("cross_entropy_rows_grad: row count mismatch");
  Matrix grad = Matrix::Zero(pred.rows(), pred.cols());
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    if (row_weights[r] == 0.0) continue;
    int t = targets[r];
    if (t < 0 || t >= pred.cols()) throw DataError("cross_entropy_rows_grad: target out of range");
    grad(r, t) = -row_weights[r] / std::max(pred(r, t), 1e-12);
  }
  return grad;
}

double masked_sequence_loss(const Eigen::Ref<const Vector>& costs, const AnnotationMask& mask,
                            int* annotated_count) {
  if (static_cast<Eigen::Index>(mask.size()) != costs.size())
    throw DataError("masked_sequence_loss: cost/mask length mismatch");
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < costs.size(); ++i) {
    if (mask[i]) {
      sum += costs[i];
      ++count;
    }
  }
  if (annotated_count) *annotated_count = count;
  return count == 0 ? 0.0 : sum / count;
}

}  // namespace balds
