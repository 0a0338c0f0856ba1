#include "balds/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "balds/rng.hpp"

namespace balds {

namespace {

Matrix draw_signatures(int count, int dim, double scale, Rng& rng) {
  Matrix sig(count, dim);
  for (int c = 0; c < count; ++c) {
    Vector row(dim);
    for (int f = 0; f < dim; ++f) row[f] = rng.normal();
    sig.row(c) = row.transpose() * (scale / row.norm());
  }
  return sig;
}

void check_signatures_independent(const Matrix& sig) {
  Eigen::FullPivLU<Matrix> lu(sig);
  if (lu.rank() < sig.rows()) throw DataError("task spec: signatures are linearly dependent");
}

}  // namespace

MultiLabelTaskSpec MultiLabelTaskSpec::defaults() {
  MultiLabelTaskSpec spec;
  spec.prevalence = Vector(7);
  // Mirrors the instrument-occurrence shape: two dominant classes, two rare
  // ones (<= 0.05) at indices 3 and 4.
  spec.prevalence << 0.60, 0.06, 0.50, 0.03, 0.04, 0.09, 0.07;
  return spec;
}

void MultiLabelTaskSpec::validate() const {
  if (classes < 1 || feature_dim < 1 || video_count < 1 || frames_per_video < 1)
    throw ConfigError("multilabel task spec: counts must be positive");
  if (prevalence.size() != classes)
    throw ConfigError("multilabel task spec: prevalence length != classes");
  if ((prevalence.array() <= 0.0).any() || (prevalence.array() >= 1.0).any())
    throw ConfigError("multilabel task spec: prevalences must lie in (0,1)");
  if (noise < 0.0) throw ConfigError("multilabel task spec: negative noise");
  if (signatures.size() != 0 &&
      (signatures.rows() != classes || signatures.cols() != feature_dim))
    throw ConfigError("multilabel task spec: signature shape mismatch");
}

PhaseTaskSpec PhaseTaskSpec::defaults() { return PhaseTaskSpec{}; }

void PhaseTaskSpec::validate() const {
  if (phases < 2 || feature_dim < 1 || video_count < 1)
    throw ConfigError("phase task spec: counts must be positive");
  if (!(self_loop >= 0.0 && self_loop < 1.0))
    throw ConfigError("phase task spec: self-loop must lie in [0,1)");
  if (min_len < 1 || max_len < min_len) throw ConfigError("phase task spec: bad length range");
  if (noise < 0.0) throw ConfigError("phase task spec: negative noise");
  if (signatures.size() != 0 && (signatures.rows() != phases || signatures.cols() != feature_dim))
    throw ConfigError("phase task spec: signature shape mismatch");
}

Matrix PhaseTaskSpec::transition_matrix() const {
  Matrix t = Matrix::Zero(phases, phases);
  for (int p = 0; p < phases - 1; ++p) {
    t(p, p) = self_loop;
    t(p, p + 1) = 1.0 - self_loop;
  }
  t(phases - 1, phases - 1) = 1.0;
  return t;
}

std::int64_t Dataset::total_frames() const {
  std::int64_t n = 0;
  for (const auto& v : videos) n += v.features.rows();
  return n;
}

void Dataset::validate() const {
  for (std::size_t v = 0; v < videos.size(); ++v) {
    if (videos[v].id != static_cast<int>(v)) throw DataError("dataset: video ids not contiguous");
    if (videos[v].features.rows() != videos[v].labels.rows())
      throw DataError("dataset: feature/label row mismatch");
    if (videos[v].features.cols() != feature_dim) throw DataError("dataset: feature width mismatch");
  }
}

Dataset generate_multilabel(const MultiLabelTaskSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng sig_rng(hash_combine(seed, 0x516u));
  Matrix signatures = spec.signatures.size() != 0
                          ? spec.signatures
                          : draw_signatures(spec.classes, spec.feature_dim, spec.signature_scale,
                                            sig_rng);
  check_signatures_independent(signatures);

  Dataset data;
  data.task = TaskKind::MultiLabel;
  data.feature_dim = spec.feature_dim;
  data.class_count = spec.classes;
  Rng rng(hash_combine(seed, 0xda7au));
  for (int v = 0; v < spec.video_count; ++v) {
    VideoData video;
    video.id = v;
    video.features.resize(spec.frames_per_video, spec.feature_dim);
    video.labels.resize(spec.frames_per_video, spec.classes);
    for (int i = 0; i < spec.frames_per_video; ++i) {
      Vector x = Vector::Zero(spec.feature_dim);
      for (int c = 0; c < spec.classes; ++c) {
        int on = rng.bernoulli(spec.prevalence[c]) ? 1 : 0;
        video.labels(i, c) = on;
        if (on) x += signatures.row(c).transpose();
      }
      for (int f = 0; f < spec.feature_dim; ++f) x[f] += spec.noise * rng.normal();
      video.features.row(i) = x.transpose();
    }
    data.videos.push_back(std::move(video));
  }
  return data;
}

Dataset generate_phases(const PhaseTaskSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng sig_rng(hash_combine(seed, 0x517u));
  Matrix signatures = spec.signatures.size() != 0
                          ? spec.signatures
                          : draw_signatures(spec.phases, spec.feature_dim, spec.signature_scale,
                                            sig_rng);
  check_signatures_independent(signatures);
  Matrix transition = spec.transition_matrix();

  Dataset data;
  data.task = TaskKind::Phase;
  data.feature_dim = spec.feature_dim;
  data.class_count = spec.phases;
  Rng rng(hash_combine(seed, 0xda7bu));
  for (int v = 0; v < spec.video_count; ++v) {
    int len = spec.min_len + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(spec.max_len - spec.min_len + 1)));
    VideoData video;
    video.id = v;
    video.features.resize(len, spec.feature_dim);
    video.labels.resize(len, 1);
    int phase = 0;
    for (int i = 0; i < len; ++i) {
      if (i > 0) {
        double u = rng.uniform();
        double acc = 0.0;
        for (int next = 0; next < spec.phases; ++next) {
          acc += transition(phase, next);
          if (u < acc) {
            phase = next;
            break;
          }
        }
      }
      video.labels(i, 0) = phase;
      Vector x = signatures.row(phase).transpose();
      for (int f = 0; f < spec.feature_dim; ++f) x[f] += spec.noise * rng.normal();
      video.features.row(i) = x.transpose();
    }
    data.videos.push_back(std::move(video));
  }
  return data;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("save_dataset: cannot open " + path + " for writing");
  std::fprintf(f, "BALDS v1 task=%s F=%d C=%d\n",
               dataset.task == TaskKind::MultiLabel ? "multilabel" : "phase", dataset.feature_dim,
               dataset.class_count);
  for (const auto& v : dataset.videos)
    std::fprintf(f, "video %d %d\n", v.id, static_cast<int>(v.features.rows()));
  for (const auto& v : dataset.videos) {
    for (Eigen::Index i = 0; i < v.features.rows(); ++i) {
      std::fprintf(f, "frame %d %d", v.id, static_cast<int>(i));
      for (Eigen::Index c = 0; c < v.features.cols(); ++c)
        std::fprintf(f, " %.9g", v.features(i, c));
      std::fprintf(f, " |");
      for (Eigen::Index c = 0; c < v.labels.cols(); ++c)
        std::fprintf(f, " %d", v.labels(i, c));
      std::fprintf(f, "\n");
    }
  }
  if (std::fclose(f) != 0) throw DataError("save_dataset: write failure on " + path);
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& message) {
  throw DataError("line " + std::to_string(line) + ": " + message);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_dataset: cannot open " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) parse_fail(1, "missing header");
  ++line_no;
  std::string task_word;
  int feature_dim = 0, class_count = 0;
  {
    std::istringstream h(line);
    std::string magic, version, task_kv, f_kv, c_kv;
    h >> magic >> version >> task_kv >> f_kv >> c_kv;
    if (magic != "BALDS") parse_fail(line_no, "not a BALDS dataset (magic '" + magic + "')");
    if (version != "v1") parse_fail(line_no, "unsupported version '" + version + "'");
    if (task_kv.rfind("task=", 0) != 0 || f_kv.rfind("F=", 0) != 0 || c_kv.rfind("C=", 0) != 0)
      parse_fail(line_no, "malformed header fields");
    task_word = task_kv.substr(5);
    feature_dim = std::atoi(f_kv.c_str() + 2);
    class_count = std::atoi(c_kv.c_str() + 2);
    if (task_word != "multilabel" && task_word != "phase")
      parse_fail(line_no, "unknown task '" + task_word + "'");
    if (feature_dim < 1 || class_count < 1) parse_fail(line_no, "bad F/C values");
  }

  Dataset data;
  data.task = task_word == "multilabel" ? TaskKind::MultiLabel : TaskKind::Phase;
  data.feature_dim = feature_dim;
  data.class_count = class_count;

  std::vector<int> filled;  // frames seen per video
  std::vector<std::vector<std::uint8_t>> seen;
  bool in_frames = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "video") {
      if (in_frames) parse_fail(line_no, "video line after frame lines");
      int id = -1, length = -1;
      if (!(ls >> id >> length)) parse_fail(line_no, "malformed video line");
      if (id != static_cast<int>(data.videos.size()))
        parse_fail(line_no, "video ids must be contiguous from 0 (got " + std::to_string(id) + ")");
      if (length < 1) parse_fail(line_no, "video length must be positive");
      VideoData v;
      v.id = id;
      v.features = Matrix::Zero(length, feature_dim);
      int label_cols = data.task == TaskKind::MultiLabel ? class_count : 1;
      v.labels = IntMatrix::Zero(length, label_cols);
      data.videos.push_back(std::move(v));
      filled.push_back(0);
      seen.emplace_back(static_cast<std::size_t>(length), 0);
    } else if (kind == "frame") {
      in_frames = true;
      int vid = -1, index = -1;
      if (!(ls >> vid >> index)) parse_fail(line_no, "malformed frame line");
      if (vid < 0 || vid >= static_cast<int>(data.videos.size()))
        parse_fail(line_no, "frame references unknown video " + std::to_string(vid));
      VideoData& v = data.videos[static_cast<std::size_t>(vid)];
      if (index < 0 || index >= v.features.rows())
        parse_fail(line_no, "frame index " + std::to_string(index) + " outside video " +
                                std::to_string(vid));
      if (seen[static_cast<std::size_t>(vid)][static_cast<std::size_t>(index)])
        parse_fail(line_no, "duplicate frame " + std::to_string(index) + " of video " +
                                std::to_string(vid));
      seen[static_cast<std::size_t>(vid)][static_cast<std::size_t>(index)] = 1;
      for (int f = 0; f < feature_dim; ++f) {
        double value = 0.0;
        if (!(ls >> value))
          parse_fail(line_no, "expected " + std::to_string(feature_dim) +
                                  " feature values, got " + std::to_string(f));
        v.features(index, f) = value;
      }
      std::string sep;
      if (!(ls >> sep) || sep != "|") parse_fail(line_no, "missing '|' label separator");
      if (data.task == TaskKind::MultiLabel) {
        for (int c = 0; c < class_count; ++c) {
          int bit = -1;
          if (!(ls >> bit) || (bit != 0 && bit != 1))
            parse_fail(line_no, "expected " + std::to_string(class_count) + " binary labels");
          v.labels(index, c) = bit;
        }
      } else {
        int phase = -1;
        if (!(ls >> phase) || phase < 0 || phase >= class_count)
          parse_fail(line_no, "phase label out of range [0," + std::to_string(class_count) + ")");
        v.labels(index, 0) = phase;
      }
      std::string extra;
      if (ls >> extra) parse_fail(line_no, "trailing content '" + extra + "'");
      ++filled[static_cast<std::size_t>(vid)];
    } else {
      parse_fail(line_no, "unknown record '" + kind + "'");
    }
  }

  if (data.videos.empty()) parse_fail(line_no, "dataset has no videos");
  for (std::size_t v = 0; v < data.videos.size(); ++v) {
    int want = static_cast<int>(data.videos[v].features.rows());
    if (filled[v] != want)
      parse_fail(line_no, "input ended with video " + std::to_string(v) + " holding " +
                              std::to_string(filled[v]) + " of " + std::to_string(want) +
                              " frames (truncated input)");
  }
  return data;
}

OracleReplay::OracleReplay(const Dataset& dataset) {
  labels_.reserve(dataset.videos.size());
  for (const auto& v : dataset.videos) labels_.push_back(v.labels);
}

Eigen::RowVectorXi OracleReplay::label(int video, int index) const {
  if (video < 0 || video >= static_cast<int>(labels_.size()))
    throw DataError("oracle: unknown video " + std::to_string(video));
  const IntMatrix& m = labels_[static_cast<std::size_t>(video)];
  if (index < 0 || index >= m.rows())
    throw DataError("oracle: unknown frame " + std::to_string(index) + " in video " +
                    std::to_string(video));
  return m.row(index);
}

IntMatrix OracleReplay::labels(const std::vector<std::pair<int, int>>& frame_ids) const {
  if (frame_ids.empty()) throw DataError("oracle: empty query");
  IntMatrix out(static_cast<Eigen::Index>(frame_ids.size()),
                labels_.empty() ? 0 : labels_[0].cols());
  for (std::size_t i = 0; i < frame_ids.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = label(frame_ids[i].first, frame_ids[i].second);
  return out;
}

}  // namespace balds
