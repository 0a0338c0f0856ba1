#include "balds/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "balds/bayes.hpp"
#include "balds/rng.hpp"

namespace balds {

namespace {

using ordered_json = nlohmann::ordered_json;

int train_video_count(const Dataset& dataset) {
  int v = static_cast<int>(dataset.videos.size());
  if (v < 2) throw DataError("dataset too small: need at least 2 videos for a 3:1 split");
  return std::max(1, (3 * v) / 4);
}

std::int64_t budget_frames(double fraction, std::int64_t total) {
  return static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
}

// Per-run state shared by the round steps.
struct RunState {
  const ExperimentConfig& cfg;
  const Dataset& data;
  int train_videos;
  NetworkSpec model;
  Pool pool;
  OracleReplay oracle;
  std::vector<IntMatrix> revealed;  // oracle answers, per train video

  RunState(const ExperimentConfig& config, const Dataset& dataset)
      : cfg(config),
        data(dataset),
        train_videos(train_video_count(dataset)),
        model(config.task == TaskKind::MultiLabel
                  ? NetworkSpec::frame_model(dataset.feature_dim, dataset.class_count,
                                             config.dropout_p, HeadKind::Sigmoid)
                  : NetworkSpec::sequence_model(dataset.feature_dim, dataset.class_count,
                                                config.dropout_p)),
        pool(
            [&] {
              std::vector<int> lengths;
              for (int v = 0; v < train_video_count(dataset); ++v)
                lengths.push_back(static_cast<int>(dataset.videos[v].features.rows()));
              return lengths;
            }(),
            config.granularity, config.segment_len),
        oracle(dataset) {
    for (int v = 0; v < train_videos; ++v) {
      int label_cols = config.task == TaskKind::MultiLabel ? dataset.class_count : 1;
      revealed.emplace_back(
          IntMatrix::Zero(dataset.videos[static_cast<std::size_t>(v)].features.rows(),
                          label_cols));
    }
  }

  // Ask the oracle for every still-unannotated frame of the units, then mark
  // them annotated.
  void reveal_and_annotate(const std::vector<std::int64_t>& units) {
    for (std::int64_t id : units) {
      for (const Frame& f : pool.unit_unannotated_frames(id))
        revealed[static_cast<std::size_t>(f.video)].row(f.index) = oracle.label(f.video, f.index);
    }
    pool.apply_annotations(units);
  }

  // Units covering the initial fraction: the first videos in id order.
  std::vector<std::int64_t> initial_units() const {
    std::int64_t want = budget_frames(cfg.initial_fraction, pool.total_frames());
    std::vector<std::int64_t> units;
    std::int64_t frames = 0;
    for (int v = 0; v < pool.video_count() && frames < want; ++v) {
      frames += pool.video_length(v);
      switch (cfg.granularity) {
        case Granularity::Frame:
          for (int i = 0; i < pool.video_length(v); ++i) units.push_back(pool.frame_id(v, i));
          break;
        case Granularity::Video:
          units.push_back(v);
          break;
        case Granularity::Segment:
          for (std::size_t s = 0; s < pool.segments().size(); ++s)
            if (pool.segments()[s].video == v) units.push_back(static_cast<std::int64_t>(s));
          break;
      }
    }
    return units;
  }

  ParameterStore train_from_scratch(int round) {
    ParameterStore params = init_parameters(model, cfg.init_seed);
    TrainOptions options;
    options.epoch_cap = cfg.epoch_cap;
    options.cost_threshold = cfg.cost_threshold;
    options.batch_size = cfg.batch_size;
    options.adam.lr = cfg.effective_learning_rate();
    options.adam.weight_decay = cfg.weight_decay;
    options.seed = hash_combine(cfg.init_seed, static_cast<std::uint64_t>(round));

    if (cfg.task == TaskKind::MultiLabel) {
      auto [x, y] = labeled_frames();
      last_stats_ = train_frame_model(model, params, x, y, inverse_frequency_weights(y), options);
    } else {
      last_stats_ = train_sequence_model(model, params, labeled_sequences(), options);
    }
    return params;
  }

  std::pair<Matrix, IntMatrix> labeled_frames() const {
    std::vector<std::pair<int, int>> ids;
    for (int v = 0; v < train_videos; ++v)
      for (int i = 0; i < pool.video_length(v); ++i)
        if (pool.frame_annotated(v, i)) ids.emplace_back(v, i);
    if (ids.empty()) throw DataError("no annotated frames to train on");
    Matrix x(static_cast<Eigen::Index>(ids.size()), data.feature_dim);
    IntMatrix y(static_cast<Eigen::Index>(ids.size()), data.class_count);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) =
          data.videos[static_cast<std::size_t>(ids[r].first)].features.row(ids[r].second);
      y.row(static_cast<Eigen::Index>(r)) =
          revealed[static_cast<std::size_t>(ids[r].first)].row(ids[r].second);
    }
    return {std::move(x), std::move(y)};
  }

  std::vector<SequenceExample> labeled_sequences() const {
    std::vector<SequenceExample> examples;
    for (int v = 0; v < train_videos; ++v) {
      const AnnotationMask& mask = pool.mask(v);
      bool any = false;
      for (std::uint8_t m : mask) any |= (m != 0);
      if (!any) continue;
      SequenceExample ex;
      ex.features = data.videos[static_cast<std::size_t>(v)].features;
      ex.mask = mask;
      ex.targets.resize(ex.features.rows());
      for (Eigen::Index i = 0; i < ex.features.rows(); ++i)
        ex.targets[i] = revealed[static_cast<std::size_t>(v)](i, 0);
      examples.push_back(std::move(ex));
    }
    return examples;
  }

  // Deterministic evaluation on the held-out videos.
  void evaluate(const ParameterStore& params, CheckpointRecord& record) const {
    int classes = data.class_count;
    if (cfg.task == TaskKind::MultiLabel) {
      std::int64_t rows = 0;
      for (std::size_t v = static_cast<std::size_t>(train_videos); v < data.videos.size(); ++v)
        rows += data.videos[v].features.rows();
      Matrix x(rows, data.feature_dim);
      IntMatrix truth(rows, classes);
      Eigen::Index at = 0;
      for (std::size_t v = static_cast<std::size_t>(train_videos); v < data.videos.size(); ++v) {
        x.middleRows(at, data.videos[v].features.rows()) = data.videos[v].features;
        truth.middleRows(at, data.videos[v].labels.rows()) = data.videos[v].labels;
        at += data.videos[v].features.rows();
      }
      Matrix prob = forward(model, params, x, nullptr);
      IntMatrix pred = (prob.array() >= 0.5).cast<int>();
      PerClassF1 scores = per_class_f1(pred, truth);
      record.weighted_f1 = weighted_f1(scores);
      record.per_class_f1 = scores.f1;
      record.accuracy = accuracy(pred, truth);
    } else {
      std::vector<Matrix> seqs;
      std::vector<IntVector> truths;
      for (std::size_t v = static_cast<std::size_t>(train_videos); v < data.videos.size(); ++v) {
        seqs.push_back(data.videos[v].features);
        truths.push_back(data.videos[v].labels.col(0));
      }
      std::vector<Matrix> outs = forward_sequences(model, params, seqs, nullptr);
      std::int64_t rows = 0;
      for (const auto& t : truths) rows += t.size();
      IntVector pred(rows), truth(rows);
      Eigen::Index at = 0;
      for (std::size_t b = 0; b < outs.size(); ++b)
        for (Eigen::Index i = 0; i < outs[b].rows(); ++i) {
          Eigen::Index am = 0;
          outs[b].row(i).maxCoeff(&am);
          pred[at] = static_cast<int>(am);
          truth[at] = truths[b][i];
          ++at;
        }
      PerClassF1 scores = per_class_f1(pred, truth, classes);
      record.weighted_f1 = weighted_f1(scores);
      record.per_class_f1 = scores.f1;
      record.accuracy = accuracy(pred, truth);
    }
  }

  // Per-class occurrence bookkeeping for the Table-3 style report.
  void occurrence_counts(CheckpointRecord& record) const {
    int classes = data.class_count;
    record.class_labeled = IntVector::Zero(classes);
    record.class_total = IntVector::Zero(classes);
    for (int v = 0; v < train_videos; ++v) {
      const IntMatrix& labels = data.videos[static_cast<std::size_t>(v)].labels;
      for (Eigen::Index i = 0; i < labels.rows(); ++i) {
        bool annotated = pool.frame_annotated(v, static_cast<int>(i));
        if (cfg.task == TaskKind::MultiLabel) {
          for (int c = 0; c < classes; ++c)
            if (labels(i, c)) {
              ++record.class_total[c];
              if (annotated) ++record.class_labeled[c];
            }
        } else {
          ++record.class_total[labels(i, 0)];
          if (annotated) ++record.class_labeled[labels(i, 0)];
        }
      }
    }
    record.labeled_frames = pool.annotated_frames();
  }

  // MC-score every unlabeled unit. Random ignores posterior content.
  std::vector<ScoredItem> score_pool(const ParameterStore& params, int round) const {
    std::vector<std::int64_t> ids = pool.unlabeled_ids();
    std::vector<ScoredItem> scored;
    scored.reserve(ids.size());
    if (cfg.acquisition == AcquisitionKind::Random) {
      for (std::int64_t id : ids) scored.push_back({id, 0.0});
      return scored;
    }
    std::uint64_t seed = hash_combine(cfg.mc_seed, static_cast<std::uint64_t>(round));

    if (cfg.granularity == Granularity::Frame) {
      Matrix x(static_cast<Eigen::Index>(ids.size()), data.feature_dim);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        Segment span = pool.unit_span(ids[k]);
        x.row(static_cast<Eigen::Index>(k)) =
            data.videos[static_cast<std::size_t>(span.video)].features.row(span.start);
      }
      auto posteriors = mc_forward_batch(model, params, x, cfg.mc_passes, seed);
      for (std::size_t k = 0; k < ids.size(); ++k)
        scored.push_back({ids[k], item_score(posteriors[k], cfg.acquisition, cfg.aggregation)});
      return scored;
    }

    // Video or segment granularity: score whole videos that still hold
    // unlabeled units, then aggregate per-frame scores over each unit.
    std::vector<int> videos_needed;
    for (std::int64_t id : ids) {
      int v = pool.unit_span(id).video;
      if (videos_needed.empty() || videos_needed.back() != v) videos_needed.push_back(v);
    }
    std::vector<Matrix> seqs;
    seqs.reserve(videos_needed.size());
    for (int v : videos_needed) seqs.push_back(data.videos[static_cast<std::size_t>(v)].features);
    auto posteriors = mc_forward_sequences(model, params, seqs, cfg.mc_passes, seed);
    std::vector<std::vector<double>> frame_scores(videos_needed.size());
    for (std::size_t b = 0; b < videos_needed.size(); ++b) {
      frame_scores[b].resize(static_cast<std::size_t>(posteriors[b].length()));
      for (int i = 0; i < posteriors[b].length(); ++i)
        frame_scores[b][static_cast<std::size_t>(i)] =
            item_score(posteriors[b].frame(i), cfg.acquisition, cfg.aggregation);
    }
    for (std::int64_t id : ids) {
      Segment span = pool.unit_span(id);
      std::size_t slot = 0;
      while (videos_needed[slot] != span.video) ++slot;
      std::vector<double> group(frame_scores[slot].begin() + span.start,
                                frame_scores[slot].begin() + span.end);
      scored.push_back({id, score_group(group, cfg.aggregation)});
    }
    return scored;
  }

  TrainStats last_stats_;
};

}  // namespace

OccurrenceRow occurrence_report(const CheckpointRecord& record) {
  OccurrenceRow row;
  Eigen::Index classes = record.class_labeled.size();
  row.in_labeled_pct = Vector::Zero(classes);
  row.captured_pct = Vector::Zero(classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    if (record.labeled_frames > 0)
      row.in_labeled_pct[c] =
          100.0 * record.class_labeled[c] / static_cast<double>(record.labeled_frames);
    if (record.class_total[c] > 0)
      row.captured_pct[c] =
          100.0 * record.class_labeled[c] / static_cast<double>(record.class_total[c]);
  }
  return row;
}

RunResult run_active_learning(const ExperimentConfig& config, const Dataset& dataset) {
  config.validate();
  dataset.validate();
  if ((config.task == TaskKind::MultiLabel) != (dataset.task == TaskKind::MultiLabel))
    throw DataError("config task does not match the dataset task");

  auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.config = config;

  RunState state(config, dataset);
  std::int64_t total = state.pool.total_frames();
  std::int64_t step = budget_frames(config.step_fraction, total);

  std::vector<std::int64_t> pending_selection = state.initial_units();
  state.reveal_and_annotate(pending_selection);
  bool exhausted = false;
  int round = 0;

  while (true) {
    ParameterStore params = state.train_from_scratch(round);
    CheckpointRecord record;
    record.annotated_frames = state.pool.annotated_frames();
    record.fraction = static_cast<double>(record.annotated_frames) / static_cast<double>(total);
    record.selected_ids = pending_selection;
    record.epochs_run = state.last_stats_.epochs_run;
    record.hit_cost_threshold = state.last_stats_.hit_cost_threshold;
    state.evaluate(params, record);
    state.occurrence_counts(record);
    result.checkpoints.push_back(std::move(record));

    if (exhausted) {
      result.pool_exhausted = true;
      break;
    }
    if (static_cast<double>(state.pool.annotated_frames()) >=
        config.final_fraction * static_cast<double>(total) - 1e-9)
      break;

    std::vector<ScoredItem> scored = state.score_pool(params, round);
    std::uint64_t rank_seed = hash_combine(config.mc_seed, static_cast<std::uint64_t>(round));
    std::vector<std::int64_t> ranked = rank_pool(scored, config.acquisition, rank_seed);
    pending_selection = state.pool.select_next(ranked, step, &exhausted);
    state.reveal_and_annotate(pending_selection);
    ++round;
  }

  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string significance_band(double p_value) {
  if (p_value < 0.01) return "p<0.01";
  if (p_value < 0.05) return "p<0.05";
  return "p>=0.05";
}

CompareResult compare_to_random(const ExperimentConfig& config, const Dataset& dataset) {
  config.validate();
  CompareResult result;
  result.baseline_runs.resize(static_cast<std::size_t>(config.baseline_repetitions));

  // The method plus every baseline repetition are independent; run them
  // concurrently. Repetition 0 reuses the configured seed so that comparing
  // Random against itself with one repetition is an exact self-comparison.
  parallel_for_index(static_cast<std::size_t>(config.baseline_repetitions) + 1,
                     [&](std::size_t job) {
                       if (job == 0) {
                         result.method = run_active_learning(config, dataset);
                         return;
                       }
                       ExperimentConfig baseline = config;
                       baseline.acquisition = AcquisitionKind::Random;
                       std::size_t rep = job - 1;
                       if (rep > 0)
                         baseline.mc_seed =
                             hash_combine(config.mc_seed, 0xb000u + static_cast<std::uint64_t>(rep));
                       result.baseline_runs[rep] = run_active_learning(baseline, dataset);
                     });

  std::size_t checkpoints = result.method.checkpoints.size();
  for (const auto& run : result.baseline_runs)
    checkpoints = std::min(checkpoints, run.checkpoints.size());

  for (std::size_t i = 0; i < checkpoints; ++i) {
    double f1 = 0.0, acc = 0.0;
    for (const auto& run : result.baseline_runs) {
      f1 += run.checkpoints[i].weighted_f1;
      acc += run.checkpoints[i].accuracy;
    }
    result.baseline_mean_f1.push_back(f1 / static_cast<double>(result.baseline_runs.size()));
    result.baseline_mean_accuracy.push_back(acc /
                                            static_cast<double>(result.baseline_runs.size()));
    result.significance.method_f1.push_back(result.method.checkpoints[i].weighted_f1);
  }
  result.significance.baseline_f1 = result.baseline_mean_f1;
  result.significance.wilcoxon =
      wilcoxon_signed_rank(result.significance.method_f1, result.significance.baseline_f1);
  result.significance.band = significance_band(result.significance.wilcoxon.p_value);
  return result;
}

namespace {

ordered_json config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["task"] = to_string(config.task);
  j["granularity"] = to_string(config.granularity);
  j["acquisition"] = to_string(config.acquisition);
  j["aggregation"] = to_string(config.aggregation);
  j["mc_passes"] = config.mc_passes;
  j["dropout_p"] = config.dropout_p;
  j["initial_fraction"] = config.initial_fraction;
  j["step_fraction"] = config.step_fraction;
  j["final_fraction"] = config.final_fraction;
  j["epoch_cap"] = config.epoch_cap;
  j["cost_threshold"] = config.cost_threshold;
  j["learning_rate"] = config.effective_learning_rate();
  j["weight_decay"] = config.weight_decay;
  j["batch_size"] = config.batch_size;
  j["init_seed"] = config.init_seed;
  j["mc_seed"] = config.mc_seed;
  j["data_seed"] = config.data_seed;
  j["baseline_repetitions"] = config.baseline_repetitions;
  j["segment_len"] = config.segment_len;
  return j;
}

ordered_json checkpoint_to_json(const CheckpointRecord& record) {
  ordered_json j;
  j["fraction"] = record.fraction;
  j["annotated_frames"] = record.annotated_frames;
  j["weighted_f1"] = record.weighted_f1;
  j["accuracy"] = record.accuracy;
  j["per_class_f1"] = std::vector<double>(record.per_class_f1.data(),
                                          record.per_class_f1.data() + record.per_class_f1.size());
  j["selected_ids"] = record.selected_ids;
  OccurrenceRow occ = occurrence_report(record);
  ordered_json occurrence;
  occurrence["labeled_count"] = std::vector<int>(record.class_labeled.data(),
                                                 record.class_labeled.data() +
                                                     record.class_labeled.size());
  occurrence["total_count"] = std::vector<int>(record.class_total.data(),
                                               record.class_total.data() +
                                                   record.class_total.size());
  occurrence["labeled_frames"] = record.labeled_frames;
  occurrence["in_labeled_pct"] =
      std::vector<double>(occ.in_labeled_pct.data(), occ.in_labeled_pct.data() + occ.in_labeled_pct.size());
  occurrence["captured_pct"] =
      std::vector<double>(occ.captured_pct.data(), occ.captured_pct.data() + occ.captured_pct.size());
  j["class_occurrence"] = occurrence;
  j["epochs_run"] = record.epochs_run;
  j["hit_cost_threshold"] = record.hit_cost_threshold;
  return j;
}

ordered_json run_to_json_object(const RunResult& result) {
  ordered_json j;
  j["version"] = 1;
  j["config"] = config_to_json(result.config);
  j["checkpoints"] = ordered_json::array();
  for (const auto& record : result.checkpoints) j["checkpoints"].push_back(checkpoint_to_json(record));
  j["pool_exhausted"] = result.pool_exhausted;
  j["wall_clock_seconds"] = result.wall_clock_seconds;
  return j;
}

}  // namespace

std::string run_result_to_json(const RunResult& result) {
  return run_to_json_object(result).dump(2) + "\n";
}

std::string compare_result_to_json(const CompareResult& result) {
  ordered_json j = run_to_json_object(result.method);
  ordered_json sig;
  sig["pairing"] = "per_checkpoint_weighted_f1";
  sig["method_f1"] = result.significance.method_f1;
  sig["baseline_f1"] = result.significance.baseline_f1;
  sig["baseline_mean_accuracy"] = result.baseline_mean_accuracy;
  sig["statistic"] = result.significance.wilcoxon.statistic;
  sig["w_plus"] = result.significance.wilcoxon.w_plus;
  sig["w_minus"] = result.significance.wilcoxon.w_minus;
  sig["p_value"] = result.significance.wilcoxon.p_value;
  sig["n"] = result.significance.wilcoxon.n;
  sig["exact"] = result.significance.wilcoxon.exact;
  sig["all_zero"] = result.significance.wilcoxon.all_zero;
  sig["band"] = result.significance.band;
  ordered_json reps = ordered_json::array();
  for (const auto& run : result.baseline_runs) {
    ordered_json rep;
    rep["mc_seed"] = run.config.mc_seed;
    std::vector<double> f1, acc;
    for (const auto& record : run.checkpoints) {
      f1.push_back(record.weighted_f1);
      acc.push_back(record.accuracy);
    }
    rep["weighted_f1"] = f1;
    rep["accuracy"] = acc;
    reps.push_back(rep);
  }
  sig["baseline_runs"] = reps;
  // keep wall_clock_seconds last
  double wall = j["wall_clock_seconds"];
  j.erase("wall_clock_seconds");
  j["significance"] = sig;
  j["wall_clock_seconds"] = wall;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw DataError("write failure on " + path);
}

void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = std::min<std::size_t>(count, hw == 0 ? 2 : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace balds
