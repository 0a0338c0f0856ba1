// Command-line harness: generate synthetic datasets, run active-learning
// experiments, compare against the random baseline, and render result tables.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "balds/harness.hpp"

namespace {

using balds::ConfigError;
using balds::DataError;
using balds::NumericError;
using ordered_json = nlohmann::ordered_json;

struct GenerateArgs {
  std::string task = "multilabel";
  std::string out;
  std::uint64_t seed = 1;
  int videos = 60;
  int frames = 200;
  int min_len = 160;
  int max_len = 240;
  double noise = -1.0;  // task default when negative
  int feature_dim = 16;
  int classes = 7;
};

int run_generate(const GenerateArgs& args) {
  balds::Dataset data;
  if (args.task == "multilabel") {
    balds::MultiLabelTaskSpec spec = balds::MultiLabelTaskSpec::defaults();
    spec.video_count = args.videos;
    spec.frames_per_video = args.frames;
    spec.feature_dim = args.feature_dim;
    if (args.classes != 7) {
      spec.classes = args.classes;
      spec.prevalence = balds::Vector::Constant(args.classes, 0.3);
    }
    if (args.noise >= 0.0) spec.noise = args.noise;
    data = balds::generate_multilabel(spec, args.seed);
  } else if (args.task == "phase") {
    balds::PhaseTaskSpec spec = balds::PhaseTaskSpec::defaults();
    spec.video_count = args.videos;
    spec.min_len = args.min_len;
    spec.max_len = args.max_len;
    spec.feature_dim = args.feature_dim;
    spec.phases = args.classes;
    if (args.noise >= 0.0) spec.noise = args.noise;
    data = balds::generate_phases(spec, args.seed);
  } else {
    throw ConfigError("generate: unknown task '" + args.task + "'");
  }
  balds::save_dataset(data, args.out);
  std::printf("wrote %s: task=%s videos=%zu frames=%lld\n", args.out.c_str(), args.task.c_str(),
              data.videos.size(), static_cast<long long>(data.total_frames()));
  return 0;
}

int run_run(const std::string& config_path, const std::string& dataset_path,
            const std::string& out_path) {
  balds::ExperimentConfig config = balds::load_config(config_path);
  balds::Dataset data = balds::load_dataset(dataset_path);
  balds::RunResult result = balds::run_active_learning(config, data);
  balds::write_text_file(out_path, balds::run_result_to_json(result));
  std::printf("wrote %s: %zu checkpoints, final F1 %.4f\n", out_path.c_str(),
              result.checkpoints.size(),
              result.checkpoints.empty() ? 0.0 : result.checkpoints.back().weighted_f1);
  return 0;
}

int run_compare(const std::string& config_path, const std::string& dataset_path,
                const std::string& out_path) {
  balds::ExperimentConfig config = balds::load_config(config_path);
  balds::Dataset data = balds::load_dataset(dataset_path);
  balds::CompareResult result = balds::compare_to_random(config, data);
  balds::write_text_file(out_path, balds::compare_result_to_json(result));
  std::printf("wrote %s: p=%.6g (%s)\n", out_path.c_str(),
              result.significance.wilcoxon.p_value, result.significance.band.c_str());
  return 0;
}

struct LoadedResult {
  std::string label;
  std::string band;  // empty when no significance block
  std::vector<double> fractions;
  std::vector<double> f1;
  std::vector<double> accuracy;
  std::vector<std::vector<double>> in_labeled_pct;  // per checkpoint, per class
  std::vector<std::vector<double>> captured_pct;
};

LoadedResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("report: cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("report: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("config") || !j.contains("checkpoints") || !j.contains("version"))
    throw DataError("report: " + path + " is missing result fields");
  LoadedResult r;
  std::string acq = j["config"].value("acquisition", "?");
  std::string agg = j["config"].value("aggregation", "?");
  r.label = acq == "random" ? "random" : acq + "+" + agg;
  if (j.contains("significance")) r.band = j["significance"].value("band", "");
  for (const auto& cp : j["checkpoints"]) {
    r.fractions.push_back(cp.value("fraction", 0.0));
    r.f1.push_back(cp.value("weighted_f1", 0.0));
    r.accuracy.push_back(cp.value("accuracy", 0.0));
    if (cp.contains("class_occurrence")) {
      r.in_labeled_pct.push_back(
          cp["class_occurrence"]["in_labeled_pct"].get<std::vector<double>>());
      r.captured_pct.push_back(
          cp["class_occurrence"]["captured_pct"].get<std::vector<double>>());
    }
  }
  return r;
}

std::string band_marker(const std::string& band) {
  if (band == "p<0.01") return "**";
  if (band == "p<0.05") return "*";
  return "";
}

int run_report(const std::string& prefix, const std::vector<std::string>& files) {
  std::vector<LoadedResult> results;
  for (const auto& f : files) results.push_back(load_result(f));
  std::map<std::string, int> label_uses;
  for (auto& r : results) {
    int n = label_uses[r.label]++;
    if (n > 0) r.label += "#" + std::to_string(n + 1);
  }

  std::size_t rows = 0;
  for (const auto& r : results) rows = std::max(rows, r.fractions.size());

  // Performance table, CSV and aligned text (rows: % annotated, columns: one
  // method per input file, cells: F1 and accuracy).
  {
    std::ostringstream csv;
    csv << "pct_annotated";
    for (const auto& r : results) csv << "," << r.label << "_f1," << r.label << "_acc";
    csv << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
      double frac = i < results[0].fractions.size() ? results[0].fractions[i] : 0.0;
      csv << static_cast<int>(frac * 100.0 + 0.5);
      for (const auto& r : results) {
        if (i < r.f1.size()) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", r.f1[i], r.accuracy[i]);
          csv << buf;
        } else {
          csv << ",,";
        }
      }
      csv << "\n";
    }
    balds::write_text_file(prefix + "_performance.csv", csv.str());
  }
  {
    std::ostringstream txt;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-10s", "% data");
    txt << buf;
    for (const auto& r : results) {
      std::snprintf(buf, sizeof(buf), " %-24s", r.label.c_str());
      txt << buf;
    }
    txt << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
      double frac = i < results[0].fractions.size() ? results[0].fractions[i] : 0.0;
      std::snprintf(buf, sizeof(buf), "%-10d", static_cast<int>(frac * 100.0 + 0.5));
      txt << buf;
      for (const auto& r : results) {
        if (i < r.f1.size()) {
          std::string cell;
          char inner[64];
          std::snprintf(inner, sizeof(inner), "%.0f%% (%.0f%%)%s", 100.0 * r.f1[i],
                        100.0 * r.accuracy[i], band_marker(r.band).c_str());
          cell = inner;
          std::snprintf(buf, sizeof(buf), " %-24s", cell.c_str());
          txt << buf;
        } else {
          std::snprintf(buf, sizeof(buf), " %-24s", "-");
          txt << buf;
        }
      }
      txt << "\n";
    }
    txt << "\nsignificance marker: ** p<0.01, * p<0.05 against the averaged random baseline\n";
    balds::write_text_file(prefix + "_performance.txt", txt.str());
  }

  // Occurrence tables (one per input that carries occurrence data): rows are
  // checkpoints, cells are in-labeled% (captured%) per class.
  for (const auto& r : results) {
    if (r.in_labeled_pct.empty()) continue;
    std::size_t classes = r.in_labeled_pct[0].size();
    std::ostringstream csv;
    csv << "pct_annotated";
    for (std::size_t c = 0; c < classes; ++c)
      csv << ",class" << c << "_in_labeled_pct,class" << c << "_captured_pct";
    csv << "\n";
    std::ostringstream txt;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-10s", "% data");
    txt << buf;
    for (std::size_t c = 0; c < classes; ++c) {
      std::snprintf(buf, sizeof(buf), " %-14s", ("C" + std::to_string(c)).c_str());
      txt << buf;
    }
    txt << "\n";
    for (std::size_t i = 0; i < r.in_labeled_pct.size(); ++i) {
      csv << static_cast<int>(r.fractions[i] * 100.0 + 0.5);
      std::snprintf(buf, sizeof(buf), "%-10d", static_cast<int>(r.fractions[i] * 100.0 + 0.5));
      txt << buf;
      for (std::size_t c = 0; c < classes; ++c) {
        char cell[64];
        std::snprintf(cell, sizeof(cell), ",%.2f,%.2f", r.in_labeled_pct[i][c],
                      r.captured_pct[i][c]);
        csv << cell;
        std::snprintf(cell, sizeof(cell), "%.0f%% (%.0f%%)", r.in_labeled_pct[i][c],
                      r.captured_pct[i][c]);
        std::snprintf(buf, sizeof(buf), " %-14s", cell);
        txt << buf;
      }
      csv << "\n";
      txt << "\n";
    }
    balds::write_text_file(prefix + "_occurrence_" + r.label + ".csv", csv.str());
    balds::write_text_file(prefix + "_occurrence_" + r.label + ".txt", txt.str());
  }
  std::printf("wrote %s_performance.{csv,txt}\n", prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-Bayesian active learning harness for frame and sequence labeling"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "synthesize a dataset file");
  generate->add_option("--task", gen.task, "multilabel | phase")->capture_default_str();
  generate->add_option("--out", gen.out, "output dataset path")->required();
  generate->add_option("--seed", gen.seed, "generation seed")->capture_default_str();
  generate->add_option("--videos", gen.videos, "video count")->capture_default_str();
  generate->add_option("--frames", gen.frames, "frames per video (multilabel)")
      ->capture_default_str();
  generate->add_option("--min-len", gen.min_len, "minimum video length (phase)")
      ->capture_default_str();
  generate->add_option("--max-len", gen.max_len, "maximum video length (phase)")
      ->capture_default_str();
  generate->add_option("--noise", gen.noise, "emission noise (task default when omitted)");
  generate->add_option("--feature-dim", gen.feature_dim, "feature dimension")
      ->capture_default_str();
  generate->add_option("--classes", gen.classes, "class / phase count")->capture_default_str();

  std::string config_path, dataset_path, out_path;
  CLI::App* run = app.add_subcommand("run", "run one active-learning experiment");
  run->add_option("--config", config_path, "experiment config (key=value)")->required();
  run->add_option("--dataset", dataset_path, "dataset file")->required();
  run->add_option("--out", out_path, "result JSON path")->required();

  CLI::App* compare = app.add_subcommand("compare",
                                         "run the method and the averaged random baseline");
  compare->add_option("--config", config_path, "experiment config (key=value)")->required();
  compare->add_option("--dataset", dataset_path, "dataset file")->required();
  compare->add_option("--out", out_path, "result JSON path")->required();

  std::string prefix = "report";
  std::vector<std::string> result_files;
  CLI::App* report = app.add_subcommand("report", "render result files as CSV and text tables");
  report->add_option("--out-prefix", prefix, "output file prefix")->capture_default_str();
  report->add_option("files", result_files, "result JSON files")->required();

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return run_generate(gen);
    if (run->parsed()) return run_run(config_path, dataset_path, out_path);
    if (compare->parsed()) return run_compare(config_path, dataset_path, out_path);
    if (report->parsed()) return run_report(prefix, result_files);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
