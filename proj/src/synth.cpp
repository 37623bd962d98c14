#include "vibespeech/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/fft.hpp"

namespace vibespeech {

void ResponseModel::validate() const {
  if (!(band_lo_hz >= 0.0 && band_lo_hz < band_hi_hz)) {
    throw ConfigError("response model: need 0 <= band_lo_hz < band_hi_hz");
  }
  if (!(sensor_rate_hz > 0.0 && std::isfinite(sensor_rate_hz))) {
    throw ConfigError("response model: sensor_rate_hz must be positive");
  }
  for (double g : axis_gain) {
    if (!(g >= 0.0 && std::isfinite(g))) throw ConfigError("response model: axis gains must be non-negative");
  }
  if (axis_gain[2] < axis_gain[0] || axis_gain[2] < axis_gain[1]) {
    throw ConfigError("response model: z gain must be the largest");
  }
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma))) {
    throw ConfigError("response model: noise_sigma must be non-negative");
  }
  if (!(volume_gain > 0.0 && volume_gain <= 1.0)) {
    throw ConfigError("response model: volume_gain must be in (0, 1]");
  }
  if (!std::isfinite(gravity_offset)) throw ConfigError("response model: gravity_offset not finite");
}

Meta ResponseModel::to_meta() const {
  return {
      {"synth.band_lo_hz", format_double(band_lo_hz)},
      {"synth.band_hi_hz", format_double(band_hi_hz)},
      {"synth.sensor_rate_hz", format_double(sensor_rate_hz)},
      {"synth.axis_gain_x", format_double(axis_gain[0])},
      {"synth.axis_gain_y", format_double(axis_gain[1])},
      {"synth.axis_gain_z", format_double(axis_gain[2])},
      {"synth.noise_sigma", format_double(noise_sigma)},
      {"synth.volume_gain", format_double(volume_gain)},
      {"synth.gravity_offset", format_double(gravity_offset)},
      {"synth.seed", std::to_string(seed)},
  };
}

double alias_frequency(double f, double f_s) {
  if (!(f >= 0.0) || !(f_s > 0.0)) throw InvariantError("alias_frequency: need f >= 0 and f_s > 0");
  double r = std::fmod(f, f_s);
  return std::min(r, f_s - r);
}

SensorTrace synthesize_trace(const AudioClip& clip, const ResponseModel& model, double lead_s,
                             double trail_s) {
  model.validate();
  if (lead_s < 0.0 || trail_s < 0.0) throw ConfigError("synthesize: negative lead/trail");
  const double audio_rate = clip.sample_rate_hz();
  if (model.band_lo_hz >= audio_rate / 2.0) {
    throw ConfigError("synthesize: pass band lies entirely above the audio Nyquist frequency");
  }
  const std::size_t m = clip.size();
  if (m == 0) throw InvariantError("synthesize: empty clip");

  std::vector<double> audio(clip.samples().begin(), clip.samples().end());
  for (double& s : audio) s *= model.volume_gain;

  auto spectrum = rfft(audio);
  const double bin_hz = audio_rate / static_cast<double>(m);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    double f = static_cast<double>(k) * bin_hz;
    if (f < model.band_lo_hz || f > model.band_hi_hz) spectrum[k] = 0.0;
  }
  audio = irfft(spectrum, m);

  // Sample-and-hold: each sensor tick latches the most recent audio sample.
  const double ratio = audio_rate / model.sensor_rate_hz;
  const auto speech_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(m) / ratio)));
  const auto lead_n = static_cast<std::size_t>(std::llround(lead_s * model.sensor_rate_hz));
  const auto trail_n = static_cast<std::size_t>(std::llround(trail_s * model.sensor_rate_hz));
  const std::size_t n = lead_n + speech_n + trail_n;

  std::vector<double> signal(n, 0.0);
  for (std::size_t k = 0; k < speech_n; ++k) {
    auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) * ratio));
    signal[lead_n + k] = audio[std::min(idx, m - 1)];
  }

  std::array<std::vector<double>, 3> channels;
  for (std::size_t a = 0; a < 3; ++a) {
    std::seed_seq seq{static_cast<std::uint32_t>(model.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(model.seed >> 32), static_cast<std::uint32_t>(a)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto& ch = channels[a];
    ch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ch[i] = model.axis_gain[a] * signal[i];
      if (model.noise_sigma > 0.0) ch[i] += model.noise_sigma * noise(rng);
    }
  }
  for (double& v : channels[2]) v += model.gravity_offset;

  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / model.sensor_rate_hz;

  Meta meta = model.to_meta();
  meta["synth.lead_s"] = format_double(lead_s);
  meta["synth.trail_s"] = format_double(trail_s);
  meta["synth.audio_rate_hz"] = format_double(audio_rate);
  meta["synth.speech_begin_idx"] = std::to_string(lead_n);
  meta["synth.speech_end_idx"] = std::to_string(lead_n + speech_n);
  if (clip.label()) meta["label"] = *clip.label();
  return SensorTrace(model.sensor_rate_hz, std::move(t), std::move(channels[0]),
                     std::move(channels[1]), std::move(channels[2]), std::move(meta));
}

}  // namespace vibespeech
