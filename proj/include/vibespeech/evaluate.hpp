#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibespeech/classifier.hpp"
#include "vibespeech/dataset.hpp"

namespace vibespeech {

using Confusion = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  std::vector<ClassMetrics> per_class;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f = 0.0;
  double macro_f = 0.0;
  double accuracy = 0.0;
};

/// Precision TP/(TP+FP), recall TP/(TP+FN), F = 2PR/(P+R), each 0 when its
/// denominator is 0. Weighted aggregates use class support.
Metrics metrics_from_confusion(const Confusion& confusion);

enum class Protocol { kCv10, kSplit66 };
std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

struct EvalReport {
  std::vector<std::string> label_vocab;
  Confusion confusion;
  Metrics metrics;
  Protocol protocol = Protocol::kCv10;
  std::size_t folds = 10;
  double train_fraction = 0.66;
  std::uint64_t seed = 1;
  /// Fingerprint of the row -> fold (or train/test) assignment.
  std::string assignment_hash;

  nlohmann::json to_json() const;
};

/// Fold id per row: rows are shuffled with `seed`, grouped by class, and
/// dealt round-robin, so each class is spread over folds within one row.
std::vector<std::size_t> stratified_folds(const std::vector<std::size_t>& labels, std::size_t classes,
                                          std::size_t k, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class seeded split. Train counts are floor(frac * n_c) plus
/// largest-remainder top-up so the total is round(frac * n).
TrainTestSplit stratified_split(const std::vector<std::size_t>& labels, std::size_t classes,
                                double train_fraction, std::uint64_t seed);

/// Stratified k-fold cross-validation; the confusion accumulates held-out predictions only.
EvalReport evaluate_cv(const LabeledDataset& ds, const Trainer& trainer, std::size_t k = 10,
                       std::uint64_t seed = 1);

EvalReport evaluate_split(const LabeledDataset& ds, const Trainer& trainer, double train_fraction = 0.66,
                          std::uint64_t seed = 1);

/// Relabels every row to `target` or "other".
LabeledDataset binary_one_vs_others(const LabeledDataset& ds, const std::string& target);

inline const std::string kOtherLabel = "other";

}  // namespace vibespeech
