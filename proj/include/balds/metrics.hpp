#pragma once

#include "balds/common.hpp"

namespace balds {

struct PerClassF1 {
  Vector f1;          // per class, 0 when TP=FP=FN=0
  IntVector support;  // true-positive count per class
};

// Multilabel: rows are frames, columns are per-class binary decisions.
PerClassF1 per_class_f1(const IntMatrix& pred, const IntMatrix& truth);
// Single-label: entries are class indices.
PerClassF1 per_class_f1(const IntVector& pred, const IntVector& truth, int classes);

// Per-class F1 averaged with weights = class support; zero-support classes
// are excluded from the average.
double weighted_f1(const PerClassF1& scores);
double weighted_f1(const IntMatrix& pred, const IntMatrix& truth);
double weighted_f1(const IntVector& pred, const IntVector& truth, int classes);

// Fraction of correct (frame, class) binary decisions.
double accuracy(const IntMatrix& pred, const IntMatrix& truth);
// Fraction of frames with the correct class.
double accuracy(const IntVector& pred, const IntVector& truth);

}  // namespace balds
