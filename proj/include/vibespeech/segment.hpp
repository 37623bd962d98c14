#pragma once

#include <cstddef>
#include <vector>

#include "vibespeech/trace.hpp"

namespace vibespeech {

/// Half-open sample interval [start_idx, end_idx) of a trace holding speech.
struct SpeechSegment {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  /// Detection statistic of the winning window (z variance or peak frame RMS).
  double peak_variance = 0.0;
  /// Median window statistic over the whole trace; the silence reference.
  double baseline_variance = 0.0;
  /// Smoothed per-frame spectral RMS, filled by word isolation.
  std::vector<double> rms_profile;

  std::size_t length() const { return end_idx - start_idx; }

  /// Peak-to-baseline gate used to tell real speech from the degenerate
  /// all-silence case, where detection still returns some window.
  bool has_speech(double min_peak_ratio = 3.0) const;

  /// Throws InvariantError unless 0 <= start < end <= n.
  void validate(std::size_t n) const;
};

struct RegionConfig {
  std::size_t window_samples = 100;
  std::size_t stride_samples = 10;
  double expand_frac = 0.3;
};

struct IsolationConfig {
  std::size_t frame_samples = 64;
  std::size_t hop_samples = 16;
  std::size_t smooth_frames = 5;
  double threshold_ratio = 2.0;
  double gap_min_s = 0.08;
  double dur_min_s = 0.1;
};

/// Zero-phase first-order high-pass (bilinear Butterworth, run forward then
/// backward) applied to each axis. Removes gravity and slow hand motion.
SensorTrace highpass_motion_filter(const SensorTrace& trace, double cutoff_hz = 2.0);

/// Magnitude response of highpass_motion_filter at f_hz (both passes).
double highpass_gain(double f_hz, double cutoff_hz, double sample_rate_hz);

/// Max-variance window on z, extended over the contiguous neighbouring windows
/// whose variance stays >= expand_frac * peak variance. The region is the
/// union of those windows.
SpeechSegment detect_speech_region(const SensorTrace& trace, const RegionConfig& cfg = {});

/// Splits a high-passed trace into word segments from the thresholded
/// short-time spectral RMS of z. Returns sorted, disjoint segments.
std::vector<SpeechSegment> isolate_words(const SensorTrace& trace, const IsolationConfig& cfg = {});

}  // namespace vibespeech
