#pragma once

#include <array>
#include <cstdint>

#include "vibespeech/audio.hpp"
#include "vibespeech/trace.hpp"

namespace vibespeech {

/// How loudspeaker audio couples into the accelerometer.
///
/// Defaults: 100-3300 Hz pass band, 200 Hz sensor rate. The per-axis gains,
/// noise level and gravity placement are toolkit conventions.
struct ResponseModel {
  double band_lo_hz = 100.0;
  double band_hi_hz = 3300.0;
  double sensor_rate_hz = 200.0;
  std::array<double, 3> axis_gain{0.3, 0.3, 1.0};
  double noise_sigma = 0.01;
  double volume_gain = 1.0;
  double gravity_offset = 9.81;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
  Meta to_meta() const;
};

/// Frequency a tone at f appears at after sampling at f_s with no anti-alias
/// filter: |f - N f_s| with N chosen so the result lies in [0, f_s/2].
double alias_frequency(double f, double f_s);

/// Renders an accelerometer trace from speech audio:
/// volume scaling, spectral band mask at the audio rate, sample-and-hold
/// decimation to the sensor rate (no anti-alias filter), per-axis gain plus
/// seeded white noise, gravity on z, and lead/trail silence.
SensorTrace synthesize_trace(const AudioClip& clip, const ResponseModel& model,
                             double lead_s = 5.0, double trail_s = 2.0);

}  // namespace vibespeech
