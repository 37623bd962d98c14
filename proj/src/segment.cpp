#include "vibespeech/segment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/fft.hpp"

namespace vibespeech {

bool SpeechSegment::has_speech(double min_peak_ratio) const {
  if (baseline_variance <= 0.0) return peak_variance > 0.0;
  return peak_variance / baseline_variance >= min_peak_ratio;
}

void SpeechSegment::validate(std::size_t n) const {
  if (!(start_idx < end_idx && end_idx <= n)) {
    throw InvariantError("speech segment [" + std::to_string(start_idx) + ", " +
                         std::to_string(end_idx) + ") invalid for trace of " +
                         std::to_string(n) + " samples");
  }
}

namespace {

double variance_of(std::span<const double> s) {
  if (s.empty()) return 0.0;
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double acc = 0.0;
  for (double v : s) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(s.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

std::vector<double> highpass_channel(std::span<const double> in, double b0, double a1,
                                     std::size_t pad) {
  const std::size_t n = in.size();
  // Odd reflection about each end point keeps the edges free of step transients.
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * in[0] - in[pad - i];
    ext[pad + n + i] = 2.0 * in[n - 1] - in[n - 2 - i];
  }
  std::copy(in.begin(), in.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  auto pass = [&](std::vector<double>& v) {
    double x_prev = v.front();
    double y_prev = 0.0;
    for (double& v_i : v) {
      double x = v_i;
      double y = b0 * (x - x_prev) - a1 * y_prev;
      x_prev = x;
      y_prev = y;
      v_i = y;
    }
  };
  pass(ext);
  std::reverse(ext.begin(), ext.end());
  pass(ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace

double highpass_gain(double f_hz, double cutoff_hz, double sample_rate_hz) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double w = std::tan(std::numbers::pi * f_hz / sample_rate_hz);
  const double single = std::abs(w) / std::sqrt(w * w + k * k);
  return single * single;
}

SensorTrace highpass_motion_filter(const SensorTrace& trace, double cutoff_hz) {
  const double fs = trace.sample_rate_hz();
  if (!(cutoff_hz > 0.0) || cutoff_hz >= fs / 2.0) {
    throw InvariantError("highpass: cutoff must be in (0, Nyquist)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / fs);
  const double b0 = 1.0 / (1.0 + k);
  const double a1 = (k - 1.0) / (k + 1.0);
  const std::size_t n = trace.size();
  const auto want = static_cast<std::size_t>(std::ceil(3.0 * fs / cutoff_hz));
  const std::size_t pad = n >= 2 ? std::min(want, n - 1) : 0;

  auto run = [&](std::span<const double> ch) {
    if (n < 2) return std::vector<double>(n, 0.0);
    return highpass_channel(ch, b0, a1, pad);
  };
  Meta meta = trace.meta();
  meta["highpass_hz"] = format_double(cutoff_hz);
  return trace.with_channels(run(trace.x()), run(trace.y()), run(trace.z()), std::move(meta));
}

SpeechSegment detect_speech_region(const SensorTrace& trace, const RegionConfig& cfg) {
  const std::size_t n = trace.size();
  const std::size_t w = cfg.window_samples;
  const std::size_t stride = cfg.stride_samples;
  if (w == 0 || stride == 0) throw ConfigError("region detection: window and stride must be positive");
  if (n < w) {
    throw InvariantError("region detection: trace of " + std::to_string(n) +
                         " samples is shorter than one window (" + std::to_string(w) + ")");
  }
  auto z = trace.z();
  const std::size_t count = (n - w) / stride + 1;
  std::vector<double> var(count);
  for (std::size_t j = 0; j < count; ++j) var[j] = variance_of(z.subspan(j * stride, w));

  std::size_t best = 0;
  for (std::size_t j = 1; j < count; ++j) {
    if (var[j] > var[best]) best = j;
  }
  SpeechSegment seg;
  seg.peak_variance = var[best];
  seg.baseline_variance = median_of(var);
  seg.start_idx = best * stride;
  seg.end_idx = seg.start_idx + w;

  // Grow over neighbouring windows that keep enough of the peak variance;
  // the region is the union of the accepted windows.
  const double floor_var = cfg.expand_frac * seg.peak_variance;
  if (seg.peak_variance > 0.0) {
    std::size_t lo = best;
    std::size_t hi = best;
    while (lo > 0 && var[lo - 1] >= floor_var) --lo;
    while (hi + 1 < count && var[hi + 1] >= floor_var) ++hi;
    seg.start_idx = lo * stride;
    seg.end_idx = hi * stride + w;
  }
  return seg;
}

std::vector<SpeechSegment> isolate_words(const SensorTrace& trace, const IsolationConfig& cfg) {
  const std::size_t n = trace.size();
  const std::size_t frame = cfg.frame_samples;
  const std::size_t hop = cfg.hop_samples;
  if (frame < 2 || hop == 0) throw ConfigError("word isolation: frame >= 2 and hop >= 1 required");
  if (n < frame) return {};
  auto z = trace.z();

  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(frame - 1));
  }
  const std::size_t frames = (n - frame) / hop + 1;
  std::vector<double> rms(frames);
  std::vector<double> buf(frame);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < frame; ++i) buf[i] = z[f * hop + i] * window[i];
    auto mag = magnitude_spectrum(buf);
    double acc = 0.0;
    for (double m : mag) acc += m * m;
    rms[f] = std::sqrt(acc / static_cast<double>(mag.size()));
  }

  std::vector<double> smooth(frames);
  const std::size_t half = cfg.smooth_frames / 2;
  for (std::size_t f = 0; f < frames; ++f) {
    std::size_t lo = f >= half ? f - half : 0;
    std::size_t hi = std::min(frames - 1, f + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += rms[j];
    smooth[f] = acc / static_cast<double>(hi - lo + 1);
  }

  const double baseline = median_of(smooth);
  const double threshold = cfg.threshold_ratio * baseline;
  if (!(threshold > 0.0)) return {};

  const double fs = trace.sample_rate_hz();
  const auto gap_min = static_cast<std::size_t>(std::llround(cfg.gap_min_s * fs));
  const auto dur_min = static_cast<std::size_t>(std::llround(cfg.dur_min_s * fs));

  // Frame f is centred on sample f*hop + frame/2 and stands for hop samples around it.
  auto frame_begin = [&](std::size_t f) {
    std::size_t c = f * hop + frame / 2;
    return c >= hop / 2 ? c - hop / 2 : 0;
  };
  auto frame_end = [&](std::size_t f) { return std::min(n, f * hop + frame / 2 + (hop + 1) / 2); };

  struct Run {
    std::size_t first, last;
  };
  std::vector<Run> runs;
  for (std::size_t f = 0; f < frames; ++f) {
    if (smooth[f] <= threshold) continue;
    if (!runs.empty() && runs.back().last + 1 == f) {
      runs.back().last = f;
    } else {
      runs.push_back({f, f});
    }
  }

  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && frame_begin(r.first) < frame_end(merged.back().last) + gap_min) {
      merged.back().last = r.last;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<SpeechSegment> out;
  for (const Run& r : merged) {
    SpeechSegment seg;
    seg.start_idx = frame_begin(r.first);
    seg.end_idx = frame_end(r.last);
    if (seg.end_idx <= seg.start_idx || seg.length() < std::max<std::size_t>(dur_min, 1)) continue;
    seg.baseline_variance = baseline;
    seg.rms_profile.assign(smooth.begin() + static_cast<std::ptrdiff_t>(r.first),
                           smooth.begin() + static_cast<std::ptrdiff_t>(r.last + 1));
    seg.peak_variance = *std::max_element(seg.rms_profile.begin(), seg.rms_profile.end());
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace vibespeech
