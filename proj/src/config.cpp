#include "balds/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace balds {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse seed '" + value + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ExperimentConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return task == TaskKind::MultiLabel ? 1e-6 : 5e-5;
}

void ExperimentConfig::validate() const {
  if (!(initial_fraction > 0.0 && initial_fraction <= final_fraction && final_fraction <= 1.0))
    throw ConfigError("config: need 0 < initial_fraction <= final_fraction <= 1");
  if (!(step_fraction > 0.0)) throw ConfigError("config: step_fraction must be positive");
  if (mc_passes < 1) throw ConfigError("config: mc_passes must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p <= 1.0))
    throw ConfigError("config: dropout_p must lie in [0,1]");
  if (epoch_cap < 1) throw ConfigError("config: epoch_cap must be >= 1");
  if (cost_threshold < 0.0) throw ConfigError("config: cost_threshold must be >= 0");
  if (effective_learning_rate() <= 0.0) throw ConfigError("config: learning_rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("config: weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (baseline_repetitions < 1) throw ConfigError("config: baseline_repetitions must be >= 1");
  if (segment_len < 1) throw ConfigError("config: segment_len must be >= 1");
  if (task == TaskKind::MultiLabel && granularity != Granularity::Frame)
    throw ConfigError("config: the multilabel task selects at frame granularity");
  if (task == TaskKind::Phase && granularity == Granularity::Frame)
    throw ConfigError("config: the phase task selects at video or segment granularity");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

    if (key == "task") {
      if (value == "multilabel")
        cfg.task = TaskKind::MultiLabel;
      else if (value == "phase")
        cfg.task = TaskKind::Phase;
      else
        throw ConfigError("config: unknown task '" + value + "'");
    } else if (key == "granularity") {
      if (value == "frame")
        cfg.granularity = Granularity::Frame;
      else if (value == "video")
        cfg.granularity = Granularity::Video;
      else if (value == "segment")
        cfg.granularity = Granularity::Segment;
      else
        throw ConfigError("config: unknown granularity '" + value + "'");
    } else if (key == "acquisition") {
      if (value == "variance")
        cfg.acquisition = AcquisitionKind::Variance;
      else if (value == "variation_ratio")
        cfg.acquisition = AcquisitionKind::VariationRatio;
      else if (value == "entropy")
        cfg.acquisition = AcquisitionKind::Entropy;
      else if (value == "mutual_information")
        cfg.acquisition = AcquisitionKind::MutualInformation;
      else if (value == "random")
        cfg.acquisition = AcquisitionKind::Random;
      else
        throw ConfigError("config: unknown acquisition '" + value + "'");
    } else if (key == "aggregation") {
      if (value == "mean")
        cfg.aggregation = AggregationKind::Mean;
      else if (value == "max")
        cfg.aggregation = AggregationKind::Max;
      else
        throw ConfigError("config: unknown aggregation '" + value + "'");
    } else if (key == "mc_passes") {
      cfg.mc_passes = parse_int(key, value);
    } else if (key == "dropout_p") {
      cfg.dropout_p = parse_double(key, value);
    } else if (key == "initial_fraction") {
      cfg.initial_fraction = parse_double(key, value);
    } else if (key == "step_fraction") {
      cfg.step_fraction = parse_double(key, value);
    } else if (key == "final_fraction") {
      cfg.final_fraction = parse_double(key, value);
    } else if (key == "epoch_cap") {
      cfg.epoch_cap = parse_int(key, value);
    } else if (key == "cost_threshold") {
      cfg.cost_threshold = parse_double(key, value);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_double(key, value);
    } else if (key == "weight_decay") {
      cfg.weight_decay = parse_double(key, value);
    } else if (key == "batch_size") {
      cfg.batch_size = parse_int(key, value);
    } else if (key == "init_seed") {
      cfg.init_seed = parse_seed(key, value);
    } else if (key == "mc_seed") {
      cfg.mc_seed = parse_seed(key, value);
    } else if (key == "data_seed") {
      cfg.data_seed = parse_seed(key, value);
    } else if (key == "baseline_repetitions") {
      cfg.baseline_repetitions = parse_int(key, value);
    } else if (key == "segment_len") {
      cfg.segment_len = parse_int(key, value);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "task = " << to_string(config.task) << "\n";
  out << "granularity = " << to_string(config.granularity) << "\n";
  out << "acquisition = " << to_string(config.acquisition) << "\n";
  out << "aggregation = " << to_string(config.aggregation) << "\n";
  out << "mc_passes = " << config.mc_passes << "\n";
  out << "dropout_p = " << format_double(config.dropout_p) << "\n";
  out << "initial_fraction = " << format_double(config.initial_fraction) << "\n";
  out << "step_fraction = " << format_double(config.step_fraction) << "\n";
  out << "final_fraction = " << format_double(config.final_fraction) << "\n";
  out << "epoch_cap = " << config.epoch_cap << "\n";
  out << "cost_threshold = " << format_double(config.cost_threshold) << "\n";
  if (config.learning_rate) out << "learning_rate = " << format_double(*config.learning_rate) << "\n";
  out << "weight_decay = " << format_double(config.weight_decay) << "\n";
  out << "batch_size = " << config.batch_size << "\n";
  out << "init_seed = " << config.init_seed << "\n";
  out << "mc_seed = " << config.mc_seed << "\n";
  out << "data_seed = " << config.data_seed << "\n";
  out << "baseline_repetitions = " << config.baseline_repetitions << "\n";
  out << "segment_len = " << config.segment_len << "\n";
  return out.str();
}

const char* to_string(TaskKind task) {
  return task == TaskKind::MultiLabel ? "multilabel" : "phase";
}

const char* to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::Frame:
      return "frame";
    case Granularity::Video:
      return "video";
    case Granularity::Segment:
      return "segment";
  }
  return "unknown";
}

}  // namespace balds
