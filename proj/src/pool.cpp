#include "balds/pool.hpp"

#include <algorithm>
#include <string>

namespace balds {

std::vector<Segment> segment_video(int video_id, int video_length, int segment_len) {
  if (video_length <= 0) throw DataError("segment_video: empty video");
  if (segment_len < 1) throw ConfigError("segment_video: segment length must be >= 1");
  std::vector<Segment> out;
  for (int start = 0; start < video_length; start += segment_len)
    out.push_back({video_id, start, std::min(start + segment_len, video_length)});
  return out;
}

double score_group(const std::vector<double>& frame_scores, AggregationKind kind) {
  if (frame_scores.empty()) throw DataError("score_group: empty group");
  if (kind == AggregationKind::Max) return *std::max_element(frame_scores.begin(), frame_scores.end());
  double sum = 0.0;
  for (double s : frame_scores) sum += s;
  return sum / static_cast<double>(frame_scores.size());
}

Pool::Pool(std::vector<int> video_lengths, Granularity granularity, int segment_len)
    : granularity_(granularity), lengths_(std::move(video_lengths)) {
  offsets_.reserve(lengths_.size());
  for (std::size_t v = 0; v < lengths_.size(); ++v) {
    if (lengths_[v] <= 0) throw DataError("pool: empty video");
    offsets_.push_back(total_frames_);
    total_frames_ += lengths_[v];
    masks_.emplace_back(static_cast<std::size_t>(lengths_[v]), 0);
  }
  if (granularity_ == Granularity::Segment) {
    for (std::size_t v = 0; v < lengths_.size(); ++v) {
      auto segs = segment_video(static_cast<int>(v), lengths_[v], segment_len);
      segments_.insert(segments_.end(), segs.begin(), segs.end());
    }
  }
}

bool Pool::frame_annotated(int video, int index) const {
  return masks_.at(static_cast<std::size_t>(video)).at(static_cast<std::size_t>(index)) != 0;
}

std::int64_t Pool::frame_id(int video, int index) const {
  return offsets_.at(static_cast<std::size_t>(video)) + index;
}

std::vector<std::int64_t> Pool::unlabeled_ids() const {
  std::vector<std::int64_t> out;
  switch (granularity_) {
    case Granularity::Frame:
      for (int v = 0; v < video_count(); ++v)
        for (int i = 0; i < lengths_[static_cast<std::size_t>(v)]; ++i)
          if (!frame_annotated(v, i)) out.push_back(frame_id(v, i));
      break;
    case Granularity::Video:
      for (int v = 0; v < video_count(); ++v) {
        const auto& mask = masks_[static_cast<std::size_t>(v)];
        if (std::any_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m == 0; }))
          out.push_back(v);
      }
      break;
    case Granularity::Segment:
      for (std::size_t s = 0; s < segments_.size(); ++s) {
        const Segment& seg = segments_[s];
        const auto& mask = masks_[static_cast<std::size_t>(seg.video)];
        for (int i = seg.start; i < seg.end; ++i)
          if (!mask[static_cast<std::size_t>(i)]) {
            out.push_back(static_cast<std::int64_t>(s));
            break;
          }
      }
      break;
  }
  return out;
}

Segment Pool::unit_span(std::int64_t id) const {
  switch (granularity_) {
    case Granularity::Frame: {
      auto it = std::upper_bound(offsets_.begin(), offsets_.end(), id);
      int v = static_cast<int>(it - offsets_.begin()) - 1;
      if (v < 0 || id - offsets_[static_cast<std::size_t>(v)] >= lengths_[static_cast<std::size_t>(v)])
        throw DataError("pool: frame id " + std::to_string(id) + " out of range");
      int i = static_cast<int>(id - offsets_[static_cast<std::size_t>(v)]);
      return {v, i, i + 1};
    }
    case Granularity::Video: {
      if (id < 0 || id >= video_count()) throw DataError("pool: video id out of range");
      return {static_cast<int>(id), 0, lengths_[static_cast<std::size_t>(id)]};
    }
    case Granularity::Segment: {
      if (id < 0 || id >= static_cast<std::int64_t>(segments_.size()))
        throw DataError("pool: segment id out of range");
      return segments_[static_cast<std::size_t>(id)];
    }
  }
  throw DataError("pool: bad granularity");
}

std::vector<Frame> Pool::unit_unannotated_frames(std::int64_t id) const {
  Segment span = unit_span(id);
  std::vector<Frame> out;
  for (int i = span.start; i < span.end; ++i)
    if (!frame_annotated(span.video, i)) out.push_back({frame_id(span.video, i), span.video, i});
  return out;
}

std::vector<std::int64_t> Pool::select_next(const std::vector<std::int64_t>& ranked,
                                            std::int64_t budget_frames, bool* exhausted) const {
  if (budget_frames < 1) throw ConfigError("select_next: budget must be >= 1");
  std::vector<std::int64_t> taken;
  std::int64_t gained = 0;
  for (std::int64_t id : ranked) {
    std::int64_t fresh = static_cast<std::int64_t>(unit_unannotated_frames(id).size());
    if (fresh == 0)
      throw DataError("select_next: ranked id " + std::to_string(id) + " is already annotated");
    taken.push_back(id);
    gained += fresh;
    if (gained >= budget_frames) {
      if (exhausted) *exhausted = false;
      return taken;
    }
  }
  if (exhausted) *exhausted = true;
  return taken;
}

void Pool::apply_annotations(const std::vector<std::int64_t>& ids) {
  for (std::int64_t id : ids) {
    auto fresh = unit_unannotated_frames(id);
    if (fresh.empty())
      throw DataError("apply_annotations: unit " + std::to_string(id) + " already annotated");
    for (const Frame& f : fresh) {
      masks_[static_cast<std::size_t>(f.video)][static_cast<std::size_t>(f.index)] = 1;
      ++annotated_frames_;
    }
  }
}

void Pool::annotate_frame(int video, int index) {
  if (video < 0 || video >= video_count() || index < 0 ||
      index >= lengths_[static_cast<std::size_t>(video)])
    throw DataError("annotate_frame: out of range");
  auto& flag = masks_[static_cast<std::size_t>(video)][static_cast<std::size_t>(index)];
  if (flag) throw DataError("annotate_frame: frame already annotated");
  flag = 1;
  ++annotated_frames_;
}

void Pool::annotate_video(int video) {
  if (video < 0 || video >= video_count()) throw DataError("annotate_video: out of range");
  for (int i = 0; i < lengths_[static_cast<std::size_t>(video)]; ++i)
    if (!frame_annotated(video, i)) annotate_frame(video, i);
}

}  // namespace balds
