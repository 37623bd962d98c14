#pragma once

#include <span>
#include <string>
#include <vector>

#include "vibespeech/segment.hpp"
#include "vibespeech/trace.hpp"

namespace vibespeech {

/// Named, fixed-order feature values. All values finite.
class FeatureVector {
 public:
  FeatureVector(std::vector<std::string> names, std::vector<double> values);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  /// Value by name; throws InvariantError when absent.
  double at(const std::string& name) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// Per-axis statistics in canonical order (19 entries).
const std::vector<std::string>& tf_axis_stat_names();

/// The 59 canonical time-frequency feature names: x_*, y_*, z_* then
/// total_abs_area, total_strength.
const std::vector<std::string>& tf_feature_names();

inline constexpr std::size_t kTfFeatureCount = 59;

/// The 19 per-axis statistics of one channel, in tf_axis_stat_names() order.
/// `dt` is the sample spacing used for the absolute area. Requires m >= 4.
std::vector<double> axis_statistics(std::span<const double> s, double dt);

/// Canonical 59-entry time-frequency vector over a segment.
FeatureVector extract_tf_features(const SensorTrace& trace, const SpeechSegment& seg);

struct MfccConfig {
  std::size_t frame_samples = 64;
  std::size_t hop_samples = 32;
  std::size_t num_filters = 20;
  std::size_t num_coeffs = 13;
  double log_floor = 1e-10;
};

std::vector<std::string> mfcc_feature_names(const MfccConfig& cfg = {});

/// Per-frame cepstra of a signal, frames x num_coeffs.
std::vector<std::vector<double>> mfcc_frames(std::span<const double> signal, double sample_rate_hz,
                                             const MfccConfig& cfg = {});

/// Mean and std of each z-axis cepstral coefficient over the segment's frames.
FeatureVector extract_mfcc_features(const SensorTrace& trace, const SpeechSegment& seg,
                                    const MfccConfig& cfg = {});

}  // namespace vibespeech
