#pragma once

#include <span>
#include <string>
#include <vector>

#include "vibespeech/classifier.hpp"

namespace vibespeech {

/// One classified word segment.
struct ScoredSegment {
  std::size_t segment_id = 0;
  std::string label;
  double confidence = 0.0;
};

/// Empirical CDF over prediction confidences.
class ConfidenceCdf {
 public:
  /// Throws DataError when empty.
  explicit ConfidenceCdf(std::vector<double> confidences);

  const std::vector<double>& sorted() const { return sorted_; }
  /// Fraction of confidences <= c.
  double cdf(double c) const;
  /// Linear-interpolation quantile, q clamped to [0, 1].
  double quantile(double q) const;
  double mean() const;

 private:
  std::vector<double> sorted_;
};

/// Classifies each row (segment ids are row positions).
std::vector<ScoredSegment> score_rows(const Classifier& model, const std::vector<std::vector<double>>& rows);

ConfidenceCdf keyword_confidence_cdf(std::span<const ScoredSegment> predictions);

/// Keeps predictions with confidence >= threshold (threshold clamped to [0, 1]).
std::vector<ScoredSegment> keyword_filter(std::span<const ScoredSegment> predictions, double threshold);

/// Threshold at the q-th quantile of confidences on non-keyword (marginal) calibration words.
double pick_keyword_threshold(std::span<const ScoredSegment> marginal_calibration, double q = 0.95);

}  // namespace vibespeech
