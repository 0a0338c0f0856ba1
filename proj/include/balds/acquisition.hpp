#pragma once

#include <cstdint>
#include <vector>

#include "balds/bayes.hpp"

namespace balds {

enum class AcquisitionKind { Variance, VariationRatio, Entropy, MutualInformation, Random };
enum class AggregationKind { Max, Mean };

struct ScoredItem {
  std::int64_t id = 0;
  double score = 0.0;
};

// Population variance (divide by T) of the per-pass likelihoods, per class.
Vector variance(const PosteriorSamples& samples);

// Softmax: 1 - f_m/T where f_m is the frequency of the modal argmax class.
double variation_ratio(const PosteriorSamples& samples);

// Sigmoid: per class, binarize each pass at 0.5 and take 1 - f_m/T over {0,1}.
Vector variation_ratio_per_class(const PosteriorSamples& samples);

// Predictive entropy of the posterior mean, natural log, 0*log(0) := 0.
double entropy(const PosteriorSamples& samples);

// Sigmoid: per-class binary entropy of the mean likelihood.
Vector entropy_per_class(const PosteriorSamples& samples);

// H(mean) - mean over passes of H(pass); tiny negatives clamp to 0.
double mutual_information(const PosteriorSamples& samples);
Vector mutual_information_per_class(const PosteriorSamples& samples);

double aggregate(const Eigen::Ref<const Vector>& per_class_scores, AggregationKind kind);

// Per-class score vector for any non-Random kind; softmax VR/Entropy/MI yield
// a length-1 vector so aggregation is uniform across heads.
Vector class_scores(const PosteriorSamples& samples, AcquisitionKind kind);

// aggregate(class_scores(...)) convenience.
double item_score(const PosteriorSamples& samples, AcquisitionKind kind, AggregationKind agg);

// Descending by score, ties broken by ascending id; result does not depend on
// the input order. Random: seeded uniform shuffle that ignores scores.
std::vector<std::int64_t> rank_pool(const std::vector<ScoredItem>& scored, AcquisitionKind kind,
                                    std::uint64_t seed);

const char* to_string(AcquisitionKind kind);
const char* to_string(AggregationKind kind);

}  // namespace balds
