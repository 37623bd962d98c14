#include "vibespeech/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vibespeech/error.hpp"

namespace vibespeech {

ConfidenceCdf::ConfidenceCdf(std::vector<double> confidences) : sorted_(std::move(confidences)) {
  if (sorted_.empty()) throw DataError("confidence cdf: no predictions");
  std::sort(sorted_.begin(), sorted_.end());
}

double ConfidenceCdf::cdf(double c) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), c);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ConfidenceCdf::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(sorted_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
  return sorted_[lo] + (pos - static_cast<double>(lo)) * (sorted_[hi] - sorted_[lo]);
}

double ConfidenceCdf::mean() const {
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / static_cast<double>(sorted_.size());
}

std::vector<ScoredSegment> score_rows(const Classifier& model, const std::vector<std::vector<double>>& rows) {
  std::vector<ScoredSegment> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto p = model.predict_row(rows[i]);
    out.push_back({i, std::move(p.label), p.confidence});
  }
  return out;
}

ConfidenceCdf keyword_confidence_cdf(std::span<const ScoredSegment> predictions) {
  std::vector<double> c;
  c.reserve(predictions.size());
  for (const auto& p : predictions) c.push_back(p.confidence);
  return ConfidenceCdf(std::move(c));
}

std::vector<ScoredSegment> keyword_filter(std::span<const ScoredSegment> predictions, double threshold) {
  threshold = std::clamp(threshold, 0.0, 1.0);
  std::vector<ScoredSegment> out;
  for (const auto& p : predictions) {
    if (p.confidence >= threshold) out.push_back(p);
  }
  return out;
}

double pick_keyword_threshold(std::span<const ScoredSegment> marginal_calibration, double q) {
  return keyword_confidence_cdf(marginal_calibration).quantile(q);
}

}  // namespace vibespeech
