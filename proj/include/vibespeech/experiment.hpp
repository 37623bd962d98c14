#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibespeech/dataset.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/evaluate.hpp"
#include "vibespeech/forest.hpp"
#include "vibespeech/logistic.hpp"
#include "vibespeech/synth.hpp"

namespace vibespeech {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class ClassifierKind { kForest, kTree, kLogistic };
ClassifierKind parse_classifier(const std::string& s);
std::string to_string(ClassifierKind k);

/// Which label the classifier learns.
struct Task {
  enum class Kind { kGender, kSpeaker, kWord, kOneVsOthers } kind = Kind::kSpeaker;
  std::string target;  // speaker id for one-vs-others

  static Task parse(const std::string& s);  // gender | speaker | word | ovo:<speaker>
  std::string to_string() const;
  LabelColumn label_column() const;
};

struct ExperimentConfig {
  std::string manifest;
  std::string output_dir;
  std::uint64_t seed = 1;
  Task task;
  ClassifierKind classifier = ClassifierKind::kForest;
  Protocol protocol = Protocol::kCv10;
  PipelineConfig pipeline;
  ForestConfig forest;
  LogisticConfig logistic;
  ResponseModel synthesis;

  /// Missing keys keep their defaults; unknown enum values throw ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string hash() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Error raised by run_experiment, tagged with the failing stage
/// (ingest, features, train, evaluate, write) and the offending input.
class StageError : public Error {
 public:
  enum class Category { kConfig, kData, kInternal };
  StageError(std::string stage, std::string input, Category category, const std::string& detail);
  const std::string& stage() const { return stage_; }
  const std::string& input() const { return input_; }
  Category category() const { return category_; }

 private:
  std::string stage_;
  std::string input_;
  Category category_;
};

Trainer make_trainer(const ExperimentConfig& cfg);

struct ExperimentResult {
  EvalReport report;
  std::size_t rows = 0;
  std::vector<SkipRecord> skipped;
  std::string report_path;
  std::string model_path;
  std::string dataset_path;
  std::string run_manifest_path;
};

/// Evaluates a prepared dataset under the configured task, classifier and protocol.
EvalReport evaluate_dataset(const LabeledDataset& ds, const ExperimentConfig& cfg);

/// Applies the task's relabelling (one-vs-others) to a dataset built on the task's label column.
LabeledDataset apply_task(const LabeledDataset& ds, const Task& task);

/// ingest -> features -> evaluate -> train final model -> write artifacts.
/// When output_dir is empty nothing is written.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct FeatureComparison {
  EvalReport tf;
  EvalReport mfcc;
  std::size_t rows = 0;
  nlohmann::json to_json() const;
};

/// Runs the same data and protocol with TF and MFCC features.
FeatureComparison compare_feature_sets(const ExperimentConfig& cfg);

struct KeywordSearchResult {
  std::vector<std::string> keywords;
  double threshold = 0.0;
  double keyword_mean_confidence = 0.0;
  double marginal_mean_confidence = 0.0;
  /// Held-out keyword occurrences accepted with the correct label.
  double keyword_recall = 0.0;
  /// Held-out marginal words accepted (false alarms).
  double marginal_accept_rate = 0.0;
  std::vector<double> keyword_confidences;
  std::vector<double> marginal_confidences;
  nlohmann::json to_json() const;
};

/// Keyword search on a word dataset: a seeded 2/3 of the vocabulary are
/// keywords, a forest is trained on keyword rows of a stratified 66% split,
/// the threshold is the q-quantile of marginal-word confidences on that
/// training side, and held-out rows are scored.
KeywordSearchResult run_keyword_search(const LabeledDataset& words, const ForestConfig& forest,
                                       std::uint64_t seed, double keyword_fraction = 2.0 / 3.0,
                                       double quantile = 0.95);

}  // namespace vibespeech
