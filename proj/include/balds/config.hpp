#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "balds/acquisition.hpp"
#include "balds/dataset.hpp"
#include "balds/pool.hpp"

namespace balds {

// Experiment parameters. Config files are flat key=value text with keys
// exactly matching the field names below; unknown or duplicate keys are
// errors. Unset learning_rate falls back to the task default (1e-6 for the
// multilabel task, 5e-5 for the phase task).
struct ExperimentConfig {
  TaskKind task = TaskKind::MultiLabel;
  Granularity granularity = Granularity::Frame;
  AcquisitionKind acquisition = AcquisitionKind::Entropy;
  AggregationKind aggregation = AggregationKind::Mean;
  int mc_passes = 20;
  double dropout_p = 0.5;
  double initial_fraction = 0.10;
  double step_fraction = 0.10;
  double final_fraction = 0.60;
  int epoch_cap = 100;
  double cost_threshold = 5e-4;
  std::optional<double> learning_rate;
  double weight_decay = 1e-4;
  int batch_size = 128;
  std::uint64_t init_seed = 1;
  std::uint64_t mc_seed = 2;
  std::uint64_t data_seed = 3;
  int baseline_repetitions = 4;
  int segment_len = 300;

  double effective_learning_rate() const;
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Canonical key order; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

const char* to_string(TaskKind task);
const char* to_string(Granularity granularity);

}  // namespace balds
