#include <doctest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vibespeech/demo_corpus.hpp"
#include "vibespeech/experiment.hpp"

using namespace vibespeech;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One repetition per (speaker, word): 110 traces, written once per test binary.
const std::string& small_corpus_manifest() {
  static const std::string path = [] {
    DemoCorpusConfig dc;
    dc.repetitions = 1;
    return generate_demo_corpus((testutil::scratch_dir("small_corpus") / "corpus").string(), dc);
  }();
  return path;
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.manifest = small_corpus_manifest();
  cfg.output_dir = out;
  cfg.task = Task::parse("gender");
  cfg.protocol = Protocol::kSplit66;
  cfg.forest.n_trees = 20;
  cfg.pipeline.label_column = cfg.task.label_column();
  return cfg;
}

}  // namespace

TEST_CASE("experiment config parsing") {
  const auto j = nlohmann::json::parse(R"({"seed": 7, "task": "ovo:f3", "classifier": "tree",
                                           "protocol": "split66", "features": "mfcc",
                                           "forest": {"n_trees": 5}})");
  const auto cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.seed == 7);
  CHECK(cfg.task.kind == Task::Kind::kOneVsOthers);
  CHECK(cfg.task.target == "f3");
  CHECK(cfg.task.label_column() == LabelColumn::kSpeaker);
  CHECK(cfg.classifier == ClassifierKind::kTree);
  CHECK(cfg.protocol == Protocol::kSplit66);
  CHECK(cfg.pipeline.feature_mode == FeatureMode::kMfcc);
  CHECK(cfg.forest.n_trees == 5);
  CHECK(cfg.forest.seed == 7);

  const auto again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(again.hash() == cfg.hash());

  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"sede": 1})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"task": "colour"})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"classifier": "svm"})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("a missing manifest fails in the ingest stage") {
  const auto dir = testutil::scratch_dir("missing_manifest");
  ExperimentConfig cfg;
  cfg.manifest = (dir / "nope.csv").string();
  cfg.output_dir = (dir / "out").string();
  try {
    run_experiment(cfg);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(e.input() == cfg.manifest);
    CHECK(e.category() != StageError::Category::kInternal);
  }
  const auto manifest = nlohmann::json::parse(slurp((dir / "out" / "run_manifest.json").string()));
  CHECK(manifest.at("status") == "failed");
  CHECK(manifest.at("failed_stage") == "ingest");
}

TEST_CASE("repeated runs write identical artifacts") {
  const auto dir = testutil::scratch_dir("determinism");
  const auto a = run_experiment(small_config((dir / "a").string()));
  const auto b = run_experiment(small_config((dir / "b").string()));
  CHECK(a.rows == 110);
  CHECK(a.skipped.empty());
  CHECK(slurp(a.report_path) == slurp(b.report_path));
  CHECK(slurp(a.model_path) == slurp(b.model_path));
  CHECK(slurp(a.dataset_path) == slurp(b.dataset_path));
  CHECK(a.report.metrics.weighted_f > 0.5);

  const auto manifest = nlohmann::json::parse(slurp(a.run_manifest_path));
  const auto reloaded = load_experiment_config(a.run_manifest_path);
  CHECK(reloaded.hash() == manifest.at("config_hash").get<std::string>());
}

TEST_CASE("feature comparison holds data and assignment fixed") {
  auto cfg = small_config("");
  const auto cmp = compare_feature_sets(cfg);
  CHECK(cmp.rows == 110);
  CHECK(cmp.tf.seed == cmp.mfcc.seed);
  CHECK(cmp.tf.assignment_hash == cmp.mfcc.assignment_hash);
  CHECK(cmp.tf.label_vocab == cmp.mfcc.label_vocab);
  const auto j = cmp.to_json();
  CHECK(j.contains("tf"));
  CHECK(j.contains("mfcc"));
}

TEST_CASE("keyword search splits the vocabulary") {
  PipelineConfig pipe;
  pipe.label_column = LabelColumn::kLabel;
  const auto words = build_dataset(small_corpus_manifest(), pipe).dataset;
  ForestConfig forest;
  forest.n_trees = 20;
  const auto r = run_keyword_search(words, forest, 3);
  CHECK(r.keywords.size() == 7);  // round(2/3 * 11)
  CHECK(r.threshold >= 0.0);
  CHECK(r.threshold <= 1.0);
  CHECK_FALSE(r.keyword_confidences.empty());
  CHECK_FALSE(r.marginal_confidences.empty());
  CHECK(r.keyword_recall >= 0.0);
  CHECK(r.keyword_recall <= 1.0);
  CHECK(run_keyword_search(words, forest, 3).to_json() == r.to_json());
}
