#include "balds/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "balds/rng.hpp"

namespace balds {

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double entropy_of(const Eigen::Ref<const Vector>& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) h -= xlogx(probs[i]);
  return h;
}

double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

double clamp_tiny_negative(double v) { return (v < 0.0 && v >= -1e-12) ? 0.0 : v; }

}  // namespace

Vector variance(const PosteriorSamples& samples) {
  if (samples.passes() < 1) throw DataError("variance: empty sample set");
  Vector mean = posterior_mean(samples);
  Vector var = Vector::Zero(samples.classes());
  for (int t = 0; t < samples.passes(); ++t) {
    Vector d = samples.samples.row(t).transpose() - mean;
    var += d.cwiseProduct(d);
  }
  return var / static_cast<double>(samples.passes());
}

double variation_ratio(const PosteriorSamples& samples) {
  if (samples.passes() < 1) throw DataError("variation_ratio: empty sample set");
  std::vector<int> counts(static_cast<std::size_t>(samples.classes()), 0);
  for (int t = 0; t < samples.passes(); ++t) {
    Eigen::Index argmax = 0;
    samples.samples.row(t).maxCoeff(&argmax);
    ++counts[static_cast<std::size_t>(argmax)];
  }
  int mode = *std::max_element(counts.begin(), counts.end());
  return 1.0 - static_cast<double>(mode) / samples.passes();
}

Vector variation_ratio_per_class(const PosteriorSamples& samples) {
  if (samples.passes() < 1) throw DataError("variation_ratio_per_class: empty sample set");
  Vector out(samples.classes());
  for (int c = 0; c < samples.classes(); ++c) {
    int positives = 0;
    for (int t = 0; t < samples.passes(); ++t)
      if (samples.samples(t, c) >= 0.5) ++positives;
    int mode = std::max(positives, samples.passes() - positives);
    out[c] = 1.0 - static_cast<double>(mode) / samples.passes();
  }
  return out;
}

double entropy(const PosteriorSamples& samples) {
  return entropy_of(posterior_mean(samples));
}

Vector entropy_per_class(const PosteriorSamples& samples) {
  Vector mean = posterior_mean(samples);
  Vector out(mean.size());
  for (Eigen::Index c = 0; c < mean.size(); ++c) out[c] = binary_entropy(mean[c]);
  return out;
}

double mutual_information(const PosteriorSamples& samples) {
  double h_mean = entropy(samples);
  double mean_h = 0.0;
  for (int t = 0; t < samples.passes(); ++t)
    mean_h += entropy_of(samples.samples.row(t).transpose());
  mean_h /= samples.passes();
  return clamp_tiny_negative(h_mean - mean_h);
}

Vector mutual_information_per_class(const PosteriorSamples& samples) {
  Vector mean = posterior_mean(samples);
  Vector out(mean.size());
  for (Eigen::Index c = 0; c < mean.size(); ++c) {
    double mean_h = 0.0;
    for (int t = 0; t < samples.passes(); ++t) mean_h += binary_entropy(samples.samples(t, c));
    mean_h /= samples.passes();
    out[c] = clamp_tiny_negative(binary_entropy(mean[c]) - mean_h);
  }
  return out;
}

double aggregate(const Eigen::Ref<const Vector>& per_class_scores, AggregationKind kind) {
  if (per_class_scores.size() == 0) throw DataError("aggregate: empty score vector");
  return kind == AggregationKind::Max ? per_class_scores.maxCoeff() : per_class_scores.mean();
}

Vector class_scores(const PosteriorSamples& samples, AcquisitionKind kind) {
  if (samples.head == HeadKind::Sigmoid) {
    switch (kind) {
      case AcquisitionKind::Variance:
        return variance(samples);
      case AcquisitionKind::VariationRatio:
        return variation_ratio_per_class(samples);
      case AcquisitionKind::Entropy:
        return entropy_per_class(samples);
      case AcquisitionKind::MutualInformation:
        return mutual_information_per_class(samples);
      case AcquisitionKind::Random:
        break;
    }
  } else {
    switch (kind) {
      case AcquisitionKind::Variance:
        return variance(samples);
      case AcquisitionKind::VariationRatio:
        return Vector::Constant(1, variation_ratio(samples));
      case AcquisitionKind::Entropy:
        return Vector::Constant(1, entropy(samples));
      case AcquisitionKind::MutualInformation:
        return Vector::Constant(1, mutual_information(samples));
      case AcquisitionKind::Random:
        break;
    }
  }
  throw ConfigError("class_scores: Random has no posterior score");
}

double item_score(const PosteriorSamples& samples, AcquisitionKind kind, AggregationKind agg) {
  return aggregate(class_scores(samples, kind), agg);
}

std::vector<std::int64_t> rank_pool(const std::vector<ScoredItem>& scored, AcquisitionKind kind,
                                    std::uint64_t seed) {
  if (scored.empty()) throw DataError("rank_pool: empty pool");
  std::vector<ScoredItem> items = scored;
  std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::vector<std::int64_t> ids;
  ids.reserve(items.size());
  for (const auto& it : items) ids.push_back(it.id);
  if (kind == AcquisitionKind::Random) {
    std::sort(ids.begin(), ids.end());
    Rng rng(hash_combine(seed, 0x7a4d0u));
    rng.shuffle(ids);
  }
  return ids;
}

const char* to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::Variance:
      return "variance";
    case AcquisitionKind::VariationRatio:
      return "variation_ratio";
    case AcquisitionKind::Entropy:
      return "entropy";
    case AcquisitionKind::MutualInformation:
      return "mutual_information";
    case AcquisitionKind::Random:
      return "random";
  }
  return "unknown";
}

const char* to_string(AggregationKind kind) {
  return kind == AggregationKind::Max ? "max" : "mean";
}

}  // namespace balds
