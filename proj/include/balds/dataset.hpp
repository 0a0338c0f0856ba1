#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "balds/common.hpp"

namespace balds {

enum class TaskKind { MultiLabel, Phase };

// Multi-label frame task: per-class Bernoulli labels, features are the sum of
// the active classes' signatures plus Gaussian noise. Two classes default to
// prevalence <= 0.05 so rare-class selection behaviour is observable.
struct MultiLabelTaskSpec {
  int classes = 7;
  int feature_dim = 16;
  Vector prevalence;   // per class, in (0,1)
  Matrix signatures;   // classes x feature_dim; drawn from the seed when empty
  double signature_scale = 2.0;
  double noise = 0.5;
  int video_count = 60;
  int frames_per_video = 200;

  static MultiLabelTaskSpec defaults();
  void validate() const;
};

// Sequential phase task: per video a forward-biased Markov phase path
// (self-loop q, advance 1-q, final phase absorbing), emissions are the phase
// signature plus Gaussian noise.
struct PhaseTaskSpec {
  int phases = 7;
  int feature_dim = 16;
  double self_loop = 0.95;
  Matrix signatures;  // phases x feature_dim; drawn from the seed when empty
  double signature_scale = 2.0;
  double noise = 0.8;
  int video_count = 60;
  int min_len = 160;
  int max_len = 240;

  static PhaseTaskSpec defaults();
  void validate() const;
  // Row-stochastic transition matrix implied by self_loop.
  Matrix transition_matrix() const;
};

struct VideoData {
  int id = 0;
  Matrix features;   // L x F
  IntMatrix labels;  // L x C binary (multilabel) or L x 1 phase index
};

struct Dataset {
  TaskKind task = TaskKind::MultiLabel;
  int feature_dim = 0;
  int class_count = 0;
  std::vector<VideoData> videos;

  std::int64_t total_frames() const;
  void validate() const;
};

Dataset generate_multilabel(const MultiLabelTaskSpec& spec, std::uint64_t seed);
Dataset generate_phases(const PhaseTaskSpec& spec, std::uint64_t seed);

// Line-oriented UTF-8 text, floats at 9 significant digits:
//   BALDS v1 task=<multilabel|phase> F=<int> C=<int>
//   video <id> <length>                 (one per video)
//   frame <video-id> <index> <F floats> | <labels>
void save_dataset(const Dataset& dataset, const std::string& path);
// Malformed input raises DataError naming the offending line.
Dataset load_dataset(const std::string& path);

// Ground-truth replay standing in for the expert annotator. Read-only; labels
// do not depend on query order or round.
class OracleReplay {
 public:
  explicit OracleReplay(const Dataset& dataset);

  // Label row of one frame; unknown ids raise DataError.
  Eigen::RowVectorXi label(int video, int index) const;
  // Rows aligned with the query list.
  IntMatrix labels(const std::vector<std::pair<int, int>>& frame_ids) const;

 private:
  std::vector<IntMatrix> labels_;
};

}  // namespace balds
