#pragma once

#include <vector>

#include "balds/common.hpp"

namespace balds {

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  // min(w_plus, w_minus)
  double p_value = 1.0;    // two-sided
  int n = 0;               // pairs remaining after dropping zero differences
  bool exact = false;      // enumeration (n <= 12) vs normal approximation
  bool all_zero = false;   // every difference was zero
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences are
// dropped, tied |differences| get averaged ranks. Exact p by enumerating all
// sign assignments for n <= 12, otherwise a normal approximation with tie
// correction and continuity correction.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace balds
