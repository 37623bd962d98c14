#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vibespeech {

/// Mono speech signal in [-1, 1] at >= 8 kHz. Invariants checked on construction.
class AudioClip {
 public:
  AudioClip(double sample_rate_hz, std::vector<double> samples,
            std::optional<std::string> label = std::nullopt);

  double sample_rate_hz() const { return sample_rate_hz_; }
  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
  const std::optional<std::string>& label() const { return label_; }

 private:
  double sample_rate_hz_;
  std::vector<double> samples_;
  std::optional<std::string> label_;
};

/// Reads a RIFF/WAVE PCM file (mono, 8 or 16 bit). 16-bit samples map to s/32768,
/// 8-bit unsigned samples to (s-128)/128. The label is the file stem.
AudioClip load_audio(const std::string& path);

/// Writes a 16-bit mono PCM WAV; samples are clamped to [-1, 1] and rounded.
void save_audio(const AudioClip& clip, const std::string& path);

}  // namespace vibespeech
