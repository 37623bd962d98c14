#include <doctest.h>

#include "test_util.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/segment.hpp"

using namespace vibespeech;

namespace {

std::vector<double> sine(std::size_t n, double f, double fs, double amp = 1.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
  return s;
}

double rms_middle(std::span<const double> s) {
  const std::size_t a = s.size() / 4, b = 3 * s.size() / 4;
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) acc += s[i] * s[i];
  return std::sqrt(acc / static_cast<double>(b - a));
}

// Noise floor plus bursts of a 60 Hz tone at the given [start, end) samples.
std::vector<double> bursty(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& bursts,
                           std::uint64_t seed, double amp = 0.3) {
  auto z = testutil::gaussian(n, 0.01, seed);
  for (auto [a, b] : bursts) {
    for (std::size_t i = a; i < b; ++i) z[i] += amp * std::sin(2.0 * std::numbers::pi * 60.0 * static_cast<double>(i) / 200.0);
  }
  return z;
}

double iou(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
  const double inter = static_cast<double>(std::max<std::ptrdiff_t>(
      0, static_cast<std::ptrdiff_t>(std::min(a1, b1)) - static_cast<std::ptrdiff_t>(std::max(a0, b0))));
  const double uni = static_cast<double>(std::max(a1, b1) - std::min(a0, b0));
  return inter / uni;
}

}  // namespace

TEST_CASE("high-pass removes a constant offset") {
  const auto tr = testutil::make_z_trace(200.0, std::vector<double>(1000, 9.81));
  const auto hp = highpass_motion_filter(tr);
  for (double v : hp.z()) CHECK(std::abs(v) < 1e-6);
  CHECK(hp.meta().at("highpass_hz") == "2");
}

TEST_CASE("high-pass attenuates slow motion and passes speech-band tones") {
  const std::size_t n = 4000;
  const auto slow = highpass_motion_filter(testutil::make_z_trace(200.0, sine(n, 0.5, 200.0)));
  CHECK(rms_middle(slow.z()) / rms_middle(sine(n, 0.5, 200.0)) < 0.10);
  const auto fast = highpass_motion_filter(testutil::make_z_trace(200.0, sine(n, 30.0, 200.0)));
  CHECK(rms_middle(fast.z()) / rms_middle(sine(n, 30.0, 200.0)) > 0.95);

  CHECK(highpass_gain(0.5, 2.0, 200.0) < 0.10);
  CHECK(highpass_gain(30.0, 2.0, 200.0) > 0.95);
  CHECK(highpass_gain(0.0, 2.0, 200.0) == 0.0);
}

TEST_CASE("high-pass is linear") {
  const auto a = testutil::gaussian(500, 1.0, 1);
  const auto b = testutil::gaussian(500, 1.0, 2);
  std::vector<double> mix(500);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];
  const auto fa = highpass_motion_filter(testutil::make_z_trace(200.0, a));
  const auto fb = highpass_motion_filter(testutil::make_z_trace(200.0, b));
  const auto fm = highpass_motion_filter(testutil::make_z_trace(200.0, mix));
  for (std::size_t i = 0; i < mix.size(); ++i) {
    CHECK(testutil::close_rel(fm.z()[i], 2.0 * fa.z()[i] - 0.5 * fb.z()[i], 1e-9));
  }
}

TEST_CASE("high-pass rejects a cutoff outside (0, Nyquist)") {
  const auto tr = testutil::make_z_trace(200.0, std::vector<double>(100, 0.0));
  CHECK_THROWS_AS(highpass_motion_filter(tr, 0.0), InvariantError);
  CHECK_THROWS_AS(highpass_motion_filter(tr, 100.0), InvariantError);
}

TEST_CASE("speech region overlaps a known burst") {
  const auto z = bursty(2000, {{900, 1200}}, 3);
  const auto seg = detect_speech_region(testutil::make_z_trace(200.0, z));
  CHECK(iou(seg.start_idx, seg.end_idx, 900, 1200) >= 0.7);
  CHECK(seg.has_speech());
  seg.validate(2000);
}

TEST_CASE("speech region moves with the burst") {
  const RegionConfig cfg;
  const auto base = detect_speech_region(testutil::make_z_trace(200.0, bursty(2000, {{600, 900}}, 4)));
  for (std::size_t shift : {40u, 100u, 370u}) {
    const auto moved =
        detect_speech_region(testutil::make_z_trace(200.0, bursty(2000, {{600 + shift, 900 + shift}}, 4)));
    const auto d0 = static_cast<std::ptrdiff_t>(moved.start_idx) - static_cast<std::ptrdiff_t>(base.start_idx);
    const auto d1 = static_cast<std::ptrdiff_t>(moved.end_idx) - static_cast<std::ptrdiff_t>(base.end_idx);
    CHECK(std::abs(d0 - static_cast<std::ptrdiff_t>(shift)) <= static_cast<std::ptrdiff_t>(cfg.stride_samples));
    CHECK(std::abs(d1 - static_cast<std::ptrdiff_t>(shift)) <= static_cast<std::ptrdiff_t>(cfg.stride_samples));
  }
}

TEST_CASE("all-silence traces report no speech") {
  const auto seg = detect_speech_region(testutil::make_z_trace(200.0, testutil::gaussian(2000, 0.01, 5)));
  CHECK_FALSE(seg.has_speech());
  const auto flat = detect_speech_region(testutil::make_z_trace(200.0, std::vector<double>(500, 1.0)));
  CHECK_FALSE(flat.has_speech());
}

TEST_CASE("region detection needs at least one window") {
  const auto tr = testutil::make_z_trace(200.0, std::vector<double>(50, 0.0));
  CHECK_THROWS_AS(detect_speech_region(tr), InvariantError);
  RegionConfig bad;
  bad.stride_samples = 0;
  CHECK_THROWS_AS(detect_speech_region(testutil::make_z_trace(200.0, std::vector<double>(500, 0.0)), bad),
                  ConfigError);
}

TEST_CASE("segment validation") {
  SpeechSegment s;
  s.start_idx = 5;
  s.end_idx = 5;
  CHECK_THROWS_AS(s.validate(10), InvariantError);
  s.end_idx = 11;
  CHECK_THROWS_AS(s.validate(10), InvariantError);
  s.end_idx = 10;
  CHECK_NOTHROW(s.validate(10));
}

TEST_CASE("four separated bursts give four words") {
  const std::vector<std::pair<std::size_t, std::size_t>> bursts{{200, 300}, {400, 480}, {600, 720}, {860, 960}};
  const auto z = bursty(1200, bursts, 6);
  const auto words = isolate_words(testutil::make_z_trace(200.0, z));
  REQUIRE(words.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(iou(words[i].start_idx, words[i].end_idx, bursts[i].first, bursts[i].second) >= 0.5);
    CHECK_FALSE(words[i].rms_profile.empty());
  }
}

TEST_CASE("isolated words are sorted and disjoint") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<std::size_t, std::size_t>> bursts;
    std::size_t at = 100;
    std::uniform_int_distribution<std::size_t> len(20, 120), gap(5, 80);
    while (at + 150 < 2000) {
      const std::size_t l = len(rng);
      bursts.push_back({at, at + l});
      at += l + gap(rng);
    }
    const auto words = isolate_words(testutil::make_z_trace(200.0, bursty(2000, bursts, 100 + trial)));
    for (std::size_t i = 0; i < words.size(); ++i) {
      CHECK(words[i].start_idx < words[i].end_idx);
      CHECK(words[i].end_idx <= 2000);
      if (i > 0) CHECK(words[i - 1].end_idx <= words[i].start_idx);
    }
  }
}

TEST_CASE("silence and short traces give no words") {
  CHECK(isolate_words(testutil::make_z_trace(200.0, std::vector<double>(1000, 0.0))).empty());
  CHECK(isolate_words(testutil::make_z_trace(200.0, testutil::gaussian(1000, 0.01, 9))).empty());
  CHECK(isolate_words(testutil::make_z_trace(200.0, std::vector<double>(30, 1.0))).empty());
}
