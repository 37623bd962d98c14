#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibespeech/dataset.hpp"
#include "vibespeech/features.hpp"

namespace vibespeech {

struct Prediction {
  std::string label;
  std::size_t label_index = 0;
  double confidence = 0.0;
  /// Probability per entry of the model's label vocabulary; sums to 1.
  std::vector<double> distribution;
};

/// A trained, immutable classifier over a fixed feature layout.
class Classifier {
 public:
  Classifier(std::vector<std::string> label_vocab, std::vector<std::string> feature_names);
  virtual ~Classifier() = default;

  const std::vector<std::string>& label_vocab() const { return vocab_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Class distribution for a raw row in feature_names() order.
  virtual std::vector<double> distribution(std::span<const double> row) const = 0;
  /// Self-describing model document (see model_io.hpp).
  virtual nlohmann::json to_json() const = 0;
  virtual std::string kind() const = 0;

  /// Argmax of distribution(); ties go to the lexicographically smallest label.
  Prediction predict_row(std::span<const double> row) const;
  /// As predict_row, after checking the names match the model's layout.
  Prediction predict(const FeatureVector& fv) const;

 private:
  std::vector<std::string> vocab_;
  std::vector<std::string> feature_names_;
};

using Trainer = std::function<std::unique_ptr<Classifier>(const LabeledDataset&)>;

}  // namespace vibespeech
