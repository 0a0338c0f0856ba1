#include "balds/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace balds {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("wilcoxon: paired samples differ in length");
  if (a.empty()) throw DataError("wilcoxon: empty samples");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }

  WilcoxonResult res;
  res.n = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    res.all_zero = true;
    res.p_value = 1.0;
    res.exact = true;
    return res;
  }

  // Rank |d| ascending, averaging ties. Double ranks keep tie averages exact
  // (ranks become integers or half-integers).
  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return std::fabs(diffs[x]) < std::fabs(diffs[y]); });
  std::vector<double> rank(diffs.size(), 0.0);
  std::vector<std::int64_t> rank2(diffs.size(), 0);  // 2 * rank, integral
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]]))
      ++j;
    // positions i..j share the average rank
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      rank[order[k]] = avg;
      rank2[order[k]] = static_cast<std::int64_t>(i + 1 + j + 1);
    }
    i = j + 1;
  }

  double w_plus = 0.0;
  std::int64_t w_plus2 = 0;
  for (std::size_t k = 0; k < diffs.size(); ++k)
    if (diffs[k] > 0.0) {
      w_plus += rank[k];
      w_plus2 += rank2[k];
    }
  double total = diffs.size() * (diffs.size() + 1) / 2.0;
  res.w_plus = w_plus;
  res.w_minus = total - w_plus;
  res.statistic = std::min(res.w_plus, res.w_minus);

  int n = res.n;
  if (n <= 12) {
    res.exact = true;
    std::uint64_t assignments = 1ULL << n;
    std::uint64_t count_le = 0, count_ge = 0;
    for (std::uint64_t s = 0; s < assignments; ++s) {
      std::int64_t w2 = 0;
      for (int k = 0; k < n; ++k)
        if (s & (1ULL << k)) w2 += rank2[static_cast<std::size_t>(k)];
      if (w2 <= w_plus2) ++count_le;
      if (w2 >= w_plus2) ++count_ge;
    }
    double tail = static_cast<double>(std::min(count_le, count_ge)) /
                  static_cast<double>(assignments);
    res.p_value = std::min(1.0, 2.0 * tail);
  } else {
    res.exact = false;
    double mean = n * (n + 1) / 4.0;
    double var = n * (n + 1) * (2.0 * n + 1.0) / 24.0;
    // Tie correction: subtract sum(t^3 - t)/48 over tie groups.
    i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() &&
             std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]]))
        ++j;
      double t = static_cast<double>(j - i + 1);
      var -= (t * t * t - t) / 48.0;
      i = j + 1;
    }
    if (var <= 0.0) {
      res.p_value = 1.0;  // all |d| tied at one value and centered
      return res;
    }
    double z = (std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
    if (z < 0.0) z = 0.0;
    res.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  }
  return res;
}

}  // namespace balds
