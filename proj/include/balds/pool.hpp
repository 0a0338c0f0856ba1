#pragma once

#include <cstdint>
#include <vector>

#include "balds/acquisition.hpp"
#include "balds/net.hpp"

namespace balds {

enum class Granularity { Frame, Video, Segment };

struct Frame {
  std::int64_t id = 0;  // global index within the pool
  int video = 0;
  int index = 0;  // position within the video
};

// Half-open frame range [start, end) of one video. Segments of a video
// partition it without overlap.
struct Segment {
  int video = 0;
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
};

// Consecutive segments of segment_len frames; the final remainder is kept as
// a shorter segment so every frame stays acquirable.
std::vector<Segment> segment_video(int video_id, int video_length, int segment_len);

// Mean or max of the per-frame scores of a video or segment.
double score_group(const std::vector<double>& frame_scores, AggregationKind kind);

// Annotation state over a fixed set of training videos. Selectable units are
// frames, whole videos, or fixed-length segments depending on granularity;
// unit ids are stable integers (frame: global frame index, video: video
// index, segment: index in segment enumeration order).
class Pool {
 public:
  Pool(std::vector<int> video_lengths, Granularity granularity, int segment_len = 300);

  Granularity granularity() const { return granularity_; }
  int video_count() const { return static_cast<int>(lengths_.size()); }
  int video_length(int video) const { return lengths_.at(static_cast<std::size_t>(video)); }
  std::int64_t total_frames() const { return total_frames_; }
  std::int64_t annotated_frames() const { return annotated_frames_; }
  const AnnotationMask& mask(int video) const { return masks_.at(static_cast<std::size_t>(video)); }
  bool frame_annotated(int video, int index) const;
  std::int64_t frame_id(int video, int index) const;
  const std::vector<Segment>& segments() const { return segments_; }

  // Units with at least one unannotated frame, ascending id.
  std::vector<std::int64_t> unlabeled_ids() const;
  // Frames of one unit that are still unannotated.
  std::vector<Frame> unit_unannotated_frames(std::int64_t id) const;
  // Frame span covered by a unit (for scoring).
  Segment unit_span(std::int64_t id) const;

  // Greedy prefix of `ranked` reaching budget_frames newly annotated frames;
  // the unit crossing the threshold is included. Sets *exhausted when the
  // ranked list runs out first.
  std::vector<std::int64_t> select_next(const std::vector<std::int64_t>& ranked,
                                        std::int64_t budget_frames,
                                        bool* exhausted = nullptr) const;

  // Mark all still-unannotated frames of each unit annotated. A unit with no
  // unannotated frame left is a double annotation and raises DataError.
  void apply_annotations(const std::vector<std::int64_t>& ids);
  // Annotate one frame; double annotation raises DataError.
  void annotate_frame(int video, int index);
  // Annotate a whole video (initial seeding).
  void annotate_video(int video);

 private:
  Granularity granularity_;
  std::vector<int> lengths_;
  std::vector<std::int64_t> offsets_;  // per video, first global frame id
  std::vector<AnnotationMask> masks_;
  std::vector<Segment> segments_;
  std::int64_t total_frames_ = 0;
  std::int64_t annotated_frames_ = 0;
};

}  // namespace balds
