#include <doctest.h>

#include "test_util.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/fft.hpp"
#include "vibespeech/synth.hpp"

using namespace vibespeech;

namespace {

// Smallest |f - N fs| over N, which is the folded frequency by definition.
double brute_alias(double f, double fs) {
  double best = f;
  for (int n = 0; n <= static_cast<int>(f / fs) + 1; ++n) best = std::min(best, std::abs(f - n * fs));
  return best;
}

AudioClip tone(double f, double seconds, double rate = 8000.0, double amp = 0.5) {
  std::vector<double> s(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = amp * std::sin(2.0 * std::numbers::pi * f * i / rate);
  return AudioClip(rate, s);
}

ResponseModel quiet_model(double fs) {
  ResponseModel m;
  m.sensor_rate_hz = fs;
  m.noise_sigma = 0.0;
  return m;
}

std::vector<double> speech_z(const SensorTrace& tr) {
  const auto b = std::stoul(tr.meta().at("synth.speech_begin_idx"));
  const auto e = std::stoul(tr.meta().at("synth.speech_end_idx"));
  std::vector<double> z(tr.z().begin() + b, tr.z().begin() + e);
  for (double& v : z) v -= 9.81;
  return z;
}

double variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("alias frequency: worked examples") {
  CHECK(alias_frequency(440.0, 200.0) == doctest::Approx(40.0));
  CHECK(alias_frequency(90.0, 200.0) == doctest::Approx(90.0));
  CHECK(alias_frequency(3300.0, 250.0) == doctest::Approx(50.0));
  CHECK(alias_frequency(200.0, 200.0) == doctest::Approx(0.0));
  CHECK(alias_frequency(100.0, 200.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(alias_frequency(-1.0, 200.0), InvariantError);
  CHECK_THROWS_AS(alias_frequency(10.0, 0.0), InvariantError);
}

TEST_CASE("alias frequency agrees with a search over N") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uf(0.0, 4000.0), ufs(100.0, 250.0);
  for (int i = 0; i < 2000; ++i) {
    const double f = uf(rng), fs = ufs(rng);
    const double fa = alias_frequency(f, fs);
    CHECK(fa == doctest::Approx(brute_alias(f, fs)).epsilon(1e-9));
    CHECK(fa >= 0.0);
    CHECK(fa <= fs / 2.0 + 1e-9);
  }
}

TEST_CASE("synthesised 440 Hz tone peaks at 40 Hz at a 200 Hz sensor rate") {
  const auto tr = synthesize_trace(tone(440.0, 2.0), quiet_model(200.0));
  const auto z = speech_z(tr);
  const auto mag = magnitude_spectrum(z);
  const auto peak = static_cast<std::size_t>(std::max_element(mag.begin() + 1, mag.end()) - mag.begin());
  const double bin = 200.0 / static_cast<double>(z.size());
  CHECK(std::abs(static_cast<double>(peak) * bin - 40.0) <= bin);
  CHECK(tr.sample_rate_hz() == 200.0);
  CHECK(tr.size() == 1000 + 400 + 400);
}

TEST_CASE("tones below the pass band never reach the sensor") {
  const auto tr = synthesize_trace(tone(50.0, 1.0), quiet_model(200.0));
  double worst = 0.0;
  for (double v : tr.z()) worst = std::max(worst, std::abs(v - 9.81));
  CHECK(worst < 1e-6);
}

TEST_CASE("variance scales with the square of the volume") {
  auto m = quiet_model(200.0);
  const auto clip = tone(700.0, 1.0);
  const double v1 = variance(speech_z(synthesize_trace(clip, m)));
  m.volume_gain = 0.8;
  const double v08 = variance(speech_z(synthesize_trace(clip, m)));
  CHECK(v08 / v1 == doctest::Approx(0.64).epsilon(0.05));
}

TEST_CASE("speech variance does not fall as the volume rises") {
  auto m = quiet_model(250.0);
  const auto clip = tone(1234.0, 1.0);
  double prev = 0.0;
  for (double g : {0.1, 0.3, 0.5, 0.8, 1.0}) {
    m.volume_gain = g;
    const double v = variance(speech_z(synthesize_trace(clip, m)));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("z carries the most energy when its gain dominates") {
  const auto tr = synthesize_trace(tone(900.0, 1.0), quiet_model(200.0));
  const auto b = std::stoul(tr.meta().at("synth.speech_begin_idx"));
  const auto e = std::stoul(tr.meta().at("synth.speech_end_idx"));
  auto var_of = [&](std::span<const double> ch) { return variance(std::vector<double>(ch.begin() + b, ch.begin() + e)); };
  CHECK(var_of(tr.z()) >= var_of(tr.x()));
  CHECK(var_of(tr.z()) >= var_of(tr.y()));
}

TEST_CASE("same clip and model give the same trace") {
  ResponseModel m;
  m.seed = 99;
  const auto clip = tone(1500.0, 0.5);
  CHECK(synthesize_trace(clip, m) == synthesize_trace(clip, m));
  ResponseModel other = m;
  other.seed = 100;
  CHECK_FALSE(synthesize_trace(clip, m) == synthesize_trace(clip, other));
}

TEST_CASE("the trace records its synthesis parameters") {
  ResponseModel m;
  m.sensor_rate_hz = 250.0;
  const auto tr = synthesize_trace(tone(800.0, 0.5), m, 1.0, 0.5);
  CHECK(tr.meta().at("synth.sensor_rate_hz") == "250");
  CHECK(tr.meta().at("synth.band_hi_hz") == "3300");
  CHECK(tr.meta().at("synth.lead_s") == "1");
  CHECK(std::stoul(tr.meta().at("synth.speech_begin_idx")) == 250);
}

TEST_CASE("invalid response models are rejected") {
  const auto clip = tone(800.0, 0.1);
  ResponseModel m;
  m.band_lo_hz = 4000.0;
  m.band_hi_hz = 5000.0;
  CHECK_THROWS_AS(synthesize_trace(clip, m), ConfigError);
  m = ResponseModel{};
  m.axis_gain = {1.0, 0.3, 0.5};
  CHECK_THROWS_AS(synthesize_trace(clip, m), ConfigError);
  m = ResponseModel{};
  m.volume_gain = 0.0;
  CHECK_THROWS_AS(synthesize_trace(clip, m), ConfigError);
  m = ResponseModel{};
  m.band_lo_hz = 500.0;
  m.band_hi_hz = 400.0;
  CHECK_THROWS_AS(synthesize_trace(clip, m), ConfigError);
}
