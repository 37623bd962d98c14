#include <cmath>
#include <numbers>

#include "vibespeech/error.hpp"
#include "vibespeech/features.hpp"
#include "vibespeech/fft.hpp"

namespace vibespeech {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// filters x bins triangular weights, evaluated in the mel domain.
std::vector<std::vector<double>> mel_filterbank(std::size_t num_filters, std::size_t frame,
                                                double rate) {
  const std::size_t bins = frame / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(rate / 2.0);
  const double step = (mel_hi - mel_lo) / static_cast<double>(num_filters + 1);
  std::vector<std::vector<double>> bank(num_filters, std::vector<double>(bins, 0.0));
  for (std::size_t j = 0; j < num_filters; ++j) {
    const double left = mel_lo + step * static_cast<double>(j);
    const double center = left + step;
    const double right = center + step;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(rate * static_cast<double>(k) / static_cast<double>(frame));
      if (mel > left && mel < right) {
        bank[j][k] = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
      }
    }
  }
  return bank;
}

}  // namespace

std::vector<std::string> mfcc_feature_names(const MfccConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cfg.num_coeffs; ++c) names.push_back("mfcc_mean_" + std::to_string(c));
  for (std::size_t c = 0; c < cfg.num_coeffs; ++c) names.push_back("mfcc_std_" + std::to_string(c));
  return names;
}

std::vector<std::vector<double>> mfcc_frames(std::span<const double> signal, double sample_rate_hz,
                                             const MfccConfig& cfg) {
  const std::size_t frame = cfg.frame_samples;
  if (frame < 2 || cfg.hop_samples == 0 || cfg.num_filters == 0 || cfg.num_coeffs == 0 ||
      cfg.num_coeffs > cfg.num_filters) {
    throw ConfigError("mfcc: invalid configuration");
  }
  if (signal.size() < frame) {
    throw InvariantError("mfcc: segment of " + std::to_string(signal.size()) +
                         " samples is shorter than one frame (" + std::to_string(frame) + ")");
  }
  const auto bank = mel_filterbank(cfg.num_filters, frame, sample_rate_hz);
  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(frame - 1));
  }
  const std::size_t nf = cfg.num_filters;
  std::vector<std::vector<double>> dct(cfg.num_coeffs, std::vector<double>(nf));
  for (std::size_t c = 0; c < cfg.num_coeffs; ++c) {
    const double norm = std::sqrt((c == 0 ? 1.0 : 2.0) / static_cast<double>(nf));
    for (std::size_t j = 0; j < nf; ++j) {
      dct[c][j] = norm * std::cos(std::numbers::pi * static_cast<double>(c) *
                                  (static_cast<double>(j) + 0.5) / static_cast<double>(nf));
    }
  }

  const std::size_t frames = (signal.size() - frame) / cfg.hop_samples + 1;
  std::vector<std::vector<double>> out(frames, std::vector<double>(cfg.num_coeffs, 0.0));
  std::vector<double> buf(frame);
  std::vector<double> log_energy(nf);
  for (std::size_t f = 0; f < frames; ++f) {
    auto chunk = signal.subspan(f * cfg.hop_samples, frame);
    double mean = 0.0;
    for (double v : chunk) mean += v;
    mean /= static_cast<double>(frame);
    for (std::size_t i = 0; i < frame; ++i) buf[i] = (chunk[i] - mean) * window[i];
    auto mag = magnitude_spectrum(buf);
    for (std::size_t j = 0; j < nf; ++j) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += bank[j][k] * mag[k];
      log_energy[j] = std::log(std::max(e, cfg.log_floor));
    }
    for (std::size_t c = 0; c < cfg.num_coeffs; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < nf; ++j) acc += dct[c][j] * log_energy[j];
      out[f][c] = acc;
    }
  }
  return out;
}

FeatureVector extract_mfcc_features(const SensorTrace& trace, const SpeechSegment& seg,
                                    const MfccConfig& cfg) {
  seg.validate(trace.size());
  auto frames = mfcc_frames(trace.z().subspan(seg.start_idx, seg.length()), trace.sample_rate_hz(), cfg);
  const std::size_t nc = cfg.num_coeffs;
  const auto count = static_cast<double>(frames.size());
  std::vector<double> values(2 * nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    double mean = 0.0;
    for (const auto& fr : frames) mean += fr[c];
    mean /= count;
    double var = 0.0;
    for (const auto& fr : frames) var += (fr[c] - mean) * (fr[c] - mean);
    values[c] = mean;
    values[nc + c] = std::sqrt(var / count);
  }
  return FeatureVector(mfcc_feature_names(cfg), std::move(values));
}

}  // namespace vibespeech
