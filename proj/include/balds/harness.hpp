#pragma once

#include <functional>
#include <string>
#include <vector>

#include "balds/config.hpp"
#include "balds/dataset.hpp"
#include "balds/metrics.hpp"
#include "balds/pool.hpp"
#include "balds/train.hpp"
#include "balds/wilcoxon.hpp"

namespace balds {

struct CheckpointRecord {
  double fraction = 0.0;  // annotated / total training frames
  std::int64_t annotated_frames = 0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  Vector per_class_f1;
  // Units whose annotation produced this checkpoint (initial videos for the
  // first one, the round's query otherwise).
  std::vector<std::int64_t> selected_ids;
  IntVector class_labeled;  // per-class occurrence count among labeled frames
  IntVector class_total;    // per-class occurrence count over the whole training pool
  std::int64_t labeled_frames = 0;
  int epochs_run = 0;
  bool hit_cost_threshold = false;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<CheckpointRecord> checkpoints;
  bool pool_exhausted = false;
  double wall_clock_seconds = 0.0;
};

struct SignificanceReport {
  std::vector<double> method_f1;    // per checkpoint
  std::vector<double> baseline_f1;  // baseline curves averaged per checkpoint
  WilcoxonResult wilcoxon;
  std::string band;  // "p<0.01" | "p<0.05" | "p>=0.05"
};

struct CompareResult {
  RunResult method;
  std::vector<RunResult> baseline_runs;
  std::vector<double> baseline_mean_f1;
  std::vector<double> baseline_mean_accuracy;
  SignificanceReport significance;
};

// Table-3 style percentages for one checkpoint: share of labeled frames
// carrying each class, and share of each class's total occurrences captured.
struct OccurrenceRow {
  Vector in_labeled_pct;
  Vector captured_pct;
};
OccurrenceRow occurrence_report(const CheckpointRecord& record);

// The full pool-based loop: seed with the first videos, then train from
// scratch / evaluate / score / query until final_fraction of the training
// frames is annotated or the pool is exhausted.
RunResult run_active_learning(const ExperimentConfig& config, const Dataset& dataset);

// Runs the configured method once and the random baseline
// `baseline_repetitions` times (first repetition shares the method's seed,
// further ones derive distinct seeds), averages the baseline curves, and
// tests the paired per-checkpoint weighted F1 with the Wilcoxon signed-rank.
CompareResult compare_to_random(const ExperimentConfig& config, const Dataset& dataset);

std::string significance_band(double p_value);

// Result files: JSON with top-level version, config, checkpoints,
// significance (compare only) and wall_clock_seconds.
std::string run_result_to_json(const RunResult& result);
std::string compare_result_to_json(const CompareResult& result);
void write_text_file(const std::string& path, const std::string& content);

// Executes `count` independent jobs on up to hardware_concurrency threads.
// Jobs must not share mutable state; exceptions rethrow on the caller.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace balds
