#include "balds/metrics.hpp"

namespace balds {

namespace {

PerClassF1 f1_from_counts(const IntVector& tp, const IntVector& fp, const IntVector& fn) {
  PerClassF1 out;
  out.f1.resize(tp.size());
  out.support.resize(tp.size());
  for (Eigen::Index c = 0; c < tp.size(); ++c) {
    out.support[c] = tp[c] + fn[c];
    double denom = 2.0 * tp[c] + fp[c] + fn[c];
    out.f1[c] = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return out;
}

}  // namespace

PerClassF1 per_class_f1(const IntMatrix& pred, const IntMatrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DataError("per_class_f1: prediction/label shape mismatch");
  if (pred.rows() == 0) throw DataError("per_class_f1: empty input");
  IntVector tp = IntVector::Zero(pred.cols());
  IntVector fp = IntVector::Zero(pred.cols());
  IntVector fn = IntVector::Zero(pred.cols());
  for (Eigen::Index r = 0; r < pred.rows(); ++r)
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
      if (pred(r, c) && truth(r, c))
        ++tp[c];
      else if (pred(r, c))
        ++fp[c];
      else if (truth(r, c))
        ++fn[c];
    }
  return f1_from_counts(tp, fp, fn);
}

PerClassF1 per_class_f1(const IntVector& pred, const IntVector& truth, int classes) {
  if (pred.size() != truth.size()) throw DataError("per_class_f1: length mismatch");
  if (pred.size() == 0) throw DataError("per_class_f1: empty input");
  IntVector tp = IntVector::Zero(classes);
  IntVector fp = IntVector::Zero(classes);
  IntVector fn = IntVector::Zero(classes);
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    int p = pred[i], t = truth[i];
    if (p < 0 || p >= classes || t < 0 || t >= classes)
      throw DataError("per_class_f1: class index out of range");
    if (p == t)
      ++tp[p];
    else {
      ++fp[p];
      ++fn[t];
    }
  }
  return f1_from_counts(tp, fp, fn);
}

double weighted_f1(const PerClassF1& scores) {
  double weight_sum = 0.0, acc = 0.0;
  for (Eigen::Index c = 0; c < scores.f1.size(); ++c) {
    if (scores.support[c] == 0) continue;
    acc += scores.support[c] * scores.f1[c];
    weight_sum += scores.support[c];
  }
  return weight_sum > 0.0 ? acc / weight_sum : 0.0;
}

double weighted_f1(const IntMatrix& pred, const IntMatrix& truth) {
  return weighted_f1(per_class_f1(pred, truth));
}

double weighted_f1(const IntVector& pred, const IntVector& truth, int classes) {
  return weighted_f1(per_class_f1(pred, truth, classes));
}

double accuracy(const IntMatrix& pred, const IntMatrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DataError("accuracy: prediction/label shape mismatch");
  if (pred.size() == 0) throw DataError("accuracy: empty input");
  Eigen::Index correct = 0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r)
    for (Eigen::Index c = 0; c < pred.cols(); ++c)
      if ((pred(r, c) != 0) == (truth(r, c) != 0)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double accuracy(const IntVector& pred, const IntVector& truth) {
  if (pred.size() != truth.size()) throw DataError("accuracy: length mismatch");
  if (pred.size() == 0) throw DataError("accuracy: empty input");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace balds
