#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "balds/config.hpp"

using namespace balds;

TEST_CASE("config: defaults and round trip") {
  ExperimentConfig cfg;
  cfg.validate();
  CHECK(cfg.mc_passes == 20);
  CHECK(cfg.initial_fraction == doctest::Approx(0.10));
  CHECK(cfg.final_fraction == doctest::Approx(0.60));
  CHECK(cfg.epoch_cap == 100);
  CHECK(cfg.cost_threshold == doctest::Approx(5e-4));
  CHECK(cfg.weight_decay == doctest::Approx(1e-4));
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.baseline_repetitions == 4);
  CHECK(cfg.segment_len == 300);

  cfg.task = TaskKind::Phase;
  cfg.granularity = Granularity::Segment;
  cfg.learning_rate = 0.003;
  cfg.mc_seed = 77;
  ExperimentConfig back = parse_config(serialize_config(cfg));
  CHECK(back.task == TaskKind::Phase);
  CHECK(back.granularity == Granularity::Segment);
  CHECK(*back.learning_rate == doctest::Approx(0.003));
  CHECK(back.mc_seed == 77);
}

TEST_CASE("config: task-default learning rates") {
  ExperimentConfig ml;
  CHECK(ml.effective_learning_rate() == doctest::Approx(1e-6));
  ExperimentConfig ph;
  ph.task = TaskKind::Phase;
  ph.granularity = Granularity::Video;
  CHECK(ph.effective_learning_rate() == doctest::Approx(5e-5));
  ph.learning_rate = 0.01;
  CHECK(ph.effective_learning_rate() == doctest::Approx(0.01));
}

TEST_CASE("config: unknown keys are errors") {
  CHECK_THROWS_AS(parse_config("task = multilabel\nbogus_key = 1\n"), ConfigError);
}

TEST_CASE("config: duplicate keys are errors") {
  CHECK_THROWS_AS(parse_config("mc_passes = 5\nmc_passes = 6\n"), ConfigError);
}

TEST_CASE("config: comments and blank lines are fine") {
  ExperimentConfig cfg = parse_config("# experiment\n\nmc_passes = 7\n  dropout_p = 0.25  \n");
  CHECK(cfg.mc_passes == 7);
  CHECK(cfg.dropout_p == doctest::Approx(0.25));
}

TEST_CASE("config: malformed values are named") {
  CHECK_THROWS_AS(parse_config("mc_passes = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dropout_p = 0.5x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task multilabel\n"), ConfigError);
}

TEST_CASE("config: schedule and combo invariants") {
  CHECK_THROWS_AS(parse_config("initial_fraction = 0.7\nfinal_fraction = 0.6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("step_fraction = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dropout_p = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task = multilabel\ngranularity = segment\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task = phase\ngranularity = frame\n"), ConfigError);
  ExperimentConfig ok = parse_config("task = phase\ngranularity = video\n");
  CHECK(ok.granularity == Granularity::Video);
}
