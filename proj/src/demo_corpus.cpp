#include "vibespeech/demo_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>

#include "vibespeech/error.hpp"
#include "vibespeech/fft.hpp"
#include "vibespeech/parallel.hpp"

namespace vibespeech {

namespace {

// tone is the F1 sine level; partials are the phase-locked 2*F1 cosine and
// 3*F1 sine levels that give each word its waveform shape.
Syllable voiced(double dur, double f1, double tone, std::array<double, 2> partials, double fricative = 0.0,
                double level = 1.0, double tail = 1.0, double pause = 0.0) {
  return {dur, f1, tone, partials, fricative, level, tail, pause};
}

Syllable unvoiced(double fricative, double level = 1.0, double pause = 0.0) {
  Syllable s;
  s.fricative_s = fricative;
  s.level = level;
  s.pause_s = pause;
  return s;
}

}  // namespace

const std::vector<WordTemplate>& digit_word_templates() {
  static const std::vector<WordTemplate> words = {
      {"zero", {voiced(0.30, 390, 0.4, {1.6, 0.0}, 0.14, 0.8), voiced(0.41, 450, 1.0, {1.2, 0.4}, 0.0, 1.0, 0.4)}},
      {"one", {voiced(0.80, 600, 1.0, {-1.0, -1.2}, 0.0, 1.0, 0.6)}},
      {"two", {voiced(0.62, 300, 1.0, {0.0, 0.8}, 0.08, 1.0, 0.3)}},
      {"three", {voiced(0.74, 270, 0.3, {-2.0, 0.0}, 0.16, 1.0, 0.8)}},
      {"four", {voiced(0.86, 570, 1.0, {0.8, 2.0}, 0.14, 1.0, 0.5)}},
      {"five", {voiced(0.50, 730, 1.0, {-1.6, 1.0}, 0.10), voiced(0.35, 400, 0.5, {-1.2, 0.6}, 0.0, 0.5, 0.5)}},
      {"six", {voiced(0.40, 400, 0.6, {2.0, 1.4}, 0.18), unvoiced(0.38, 1.0, 0.09)}},
      {"seven",
       {voiced(0.40, 530, 0.8, {-0.4, 0.0}, 0.16), voiced(0.58, 500, 1.0, {0.0, -0.8}, 0.0, 0.6, 0.5, 0.06)}},
      {"eight", {voiced(0.50, 480, 0.7, {1.2, 0.6}, 0.0, 1.0, 1.3), unvoiced(0.12)}},
      {"nine", {voiced(0.32, 700, 1.0, {-1.2, 2.0}), voiced(0.37, 350, 0.6, {-0.6, 1.6}, 0.0, 0.8, 0.4, 0.06)}},
      {"oh", {voiced(0.55, 500, 1.0, {0.6, -1.8}, 0.0, 1.0, 1.5)}},
  };
  return words;
}

std::vector<SpeakerProfile> demo_speakers() {
  const double male_f0[] = {110, 120, 130, 140, 150};
  // 200 Hz would alias onto DC at the demo sensor rate, and 190/210 alias
  // onto the same frequency, so the female pitches avoid the symmetric pairs.
  const double female_f0[] = {190, 205, 215, 222, 230};
  const double scale_offset[] = {-0.04, 0.02, -0.01, 0.04, 0.0};
  const double tilt[] = {-16, -19, -17, -20, -18};
  const double loud[] = {0.3, 0.75, 0.4, 0.55, 1.0};
  const double slope[] = {-0.06, 0.04, 0.0, -0.02, 0.08};
  const int tempo_rank[] = {2, 0, 3, 1, 4};
  std::vector<SpeakerProfile> out;
  for (int i = 0; i < 5; ++i) {
    SpeakerProfile p;
    p.id = "m" + std::to_string(i + 1);
    p.gender = "male";
    p.f0_hz = male_f0[i];
    p.formant_scale = 1.0 + scale_offset[i];
    p.tilt_db_per_octave = tilt[i];
    p.loudness = loud[i];
    p.f0_slope = slope[i];
    p.tempo = 1.08 * std::pow(1.08, tempo_rank[i] - 2);
    p.breathiness = 0.02 * (1 + i % 3);
    out.push_back(p);
  }
  for (int i = 0; i < 5; ++i) {
    SpeakerProfile p;
    p.id = "f" + std::to_string(i + 1);
    p.gender = "female";
    p.f0_hz = female_f0[i];
    p.formant_scale = 1.16 + scale_offset[4 - i];
    p.tilt_db_per_octave = tilt[(i + 2) % 5];
    p.loudness = loud[(i + 3) % 5];
    p.f0_slope = slope[(i + 1) % 5];
    p.tempo = 0.92 * std::pow(1.08, tempo_rank[i] - 2);
    p.breathiness = 0.7 * (1.0 + 0.1 * (i % 3));
    out.push_back(p);
  }
  return out;
}

namespace {

double jittered(double v, double rel, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return v * (1.0 + rel * u(rng));
}

// Smooth onset/offset so words start and end without clicks.
double envelope(double t, double dur) {
  const double ramp = std::min(0.03, dur / 3.0);
  if (t < ramp) return 0.5 - 0.5 * std::cos(std::numbers::pi * t / ramp);
  if (t > dur - ramp) return 0.5 - 0.5 * std::cos(std::numbers::pi * (dur - t) / ramp);
  return 1.0;
}

std::vector<double> fricative(std::size_t n, double rate, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> noise(n);
  for (double& v : noise) v = g(rng);
  auto spec = rfft(noise);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = rate * static_cast<double>(k) / static_cast<double>(n);
    if (f < 1800.0 || f > 3600.0) spec[k] = 0.0;
  }
  auto out = irfft(spec, n);
  double rms = 0.0;
  for (double v : out) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(n));
  const double dur = static_cast<double>(n) / rate;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = rms > 0.0 ? 0.3 * out[i] / rms * envelope(static_cast<double>(i) / rate, dur) : 0.0;
  }
  return out;
}

constexpr double kBreathOnsetS = 0.15;
constexpr double kBuzzLevel = 0.25;
constexpr double kRmsLevel = 0.25;

}  // namespace

AudioClip render_word(const WordTemplate& word, const SpeakerProfile& speaker, double audio_rate_hz,
                      const UtteranceJitter& jitter, std::mt19937_64& rng) {
  const double rate = audio_rate_hz;
  const double nyquist_guard = std::min(3600.0, 0.45 * rate);
  const double f0 = jittered(speaker.f0_hz, jitter.f0, rng);
  const double dur_scale = speaker.tempo * jittered(1.0, jitter.duration, rng);
  const double formant_scale = speaker.formant_scale * jittered(1.0, jitter.formant, rng);

  std::vector<double> audio;
  double voiced_energy = 0.0;
  std::size_t voiced_count = 0;
  const auto pad = static_cast<std::size_t>(0.05 * rate);
  audio.assign(pad, 0.0);
  for (const auto& syl : word.syllables) {
    audio.insert(audio.end(), static_cast<std::size_t>(syl.pause_s * dur_scale * rate), 0.0);
    if (syl.fricative_s > 0.0) {
      auto n = static_cast<std::size_t>(syl.fricative_s * dur_scale * rate);
      if (n >= 8) {
        auto fr = fricative(n, rate, rng);
        for (double& v : fr) v *= syl.level;
        audio.insert(audio.end(), fr.begin(), fr.end());
      }
    }
    if (syl.duration_s <= 0.0) continue;
    if (speaker.breathiness > 0.0) {
      const auto m = static_cast<std::size_t>(kBreathOnsetS * rate);
      std::normal_distribution<double> g(0.0, speaker.breathiness);
      for (std::size_t i = 0; i < m; ++i) {
        audio.push_back(syl.level * g(rng) * envelope(static_cast<double>(i) / rate, kBreathOnsetS));
      }
    }
    const double dur = syl.duration_s * dur_scale;
    const auto n = static_cast<std::size_t>(dur * rate);
    const double f1 = syl.f1_hz * formant_scale;
    std::vector<double> seg(n, 0.0);
    double cycle_phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double f_now = f0 * (1.0 + speaker.f0_slope * (t / dur - 0.5));
      cycle_phase += 2.0 * std::numbers::pi * f_now / rate;
      const double th = 2.0 * std::numbers::pi * f1 * t;
      double v = f1 < nyquist_guard ? syl.tone * std::sin(th) : 0.0;
      if (2 * f1 < nyquist_guard) v += syl.partials[0] * std::cos(2.0 * th);
      if (3 * f1 < nyquist_guard) v += syl.partials[1] * std::sin(3.0 * th);
      double buzz = 0.0;
      for (std::size_t h = 1;; ++h) {
        if (f_now * static_cast<double>(h) >= nyquist_guard) break;
        const double amp = std::pow(10.0, speaker.tilt_db_per_octave * std::log2(static_cast<double>(h)) / 20.0);
        buzz += amp * std::sin(static_cast<double>(h) * cycle_phase);
      }
      const double slope = 1.0 + (syl.tail - 1.0) * t / dur;
      seg[i] = syl.level * slope * (v + kBuzzLevel * buzz) * envelope(t, dur);
    }
    for (double x : seg) voiced_energy += x * x;
    voiced_count += seg.size();
    audio.insert(audio.end(), seg.begin(), seg.end());
  }
  audio.insert(audio.end(), pad, 0.0);

  // Loudness sets the RMS of the voiced parts, so breath and fricatives keep
  // their level relative to the vowels.
  double peak = 0.0;
  for (double v : audio) peak = std::max(peak, std::abs(v));
  if (voiced_count > 0 && voiced_energy > 0.0) {
    const double rms = std::sqrt(voiced_energy / static_cast<double>(voiced_count));
    double gain = kRmsLevel * speaker.loudness * jittered(1.0, jitter.amplitude, rng) / rms;
    gain = std::min(gain, 0.98 / peak);
    for (double& v : audio) v *= gain;
  }
  return AudioClip(rate, std::move(audio), word.word);
}

namespace {

std::uint64_t item_seed(std::uint64_t base, std::size_t speaker, std::size_t word, std::size_t rep) {
  std::uint64_t h = base * 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t v : {std::uint64_t(speaker), std::uint64_t(word), std::uint64_t(rep)}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace

std::vector<CorpusItem> render_demo_corpus(const DemoCorpusConfig& cfg) {
  const auto speakers = demo_speakers();
  const auto& words = digit_word_templates();
  const std::size_t total = speakers.size() * words.size() * cfg.repetitions;
  if (total == 0) throw ConfigError("demo corpus: repetitions must be >= 1");
  std::vector<std::optional<CorpusItem>> slots(total);
  parallel_for(total, [&](std::size_t idx) {
    const std::size_t s = idx / (words.size() * cfg.repetitions);
    const std::size_t w = (idx / cfg.repetitions) % words.size();
    const std::size_t r = idx % cfg.repetitions;
    const std::uint64_t seed = item_seed(cfg.seed, s, w, r);
    std::mt19937_64 rng(seed);
    AudioClip clip = render_word(words[w], speakers[s], cfg.audio_rate_hz, cfg.jitter, rng);
    ResponseModel model = cfg.model;
    model.seed = seed ^ cfg.model.seed;
    SensorTrace trace = synthesize_trace(clip, model, cfg.lead_s, cfg.trail_s);
    ManifestEntry e{speakers[s].id + "_" + words[w].word + "_" + std::to_string(r), words[w].word, speakers[s].id,
                    speakers[s].gender};
    slots[idx].emplace(CorpusItem{std::move(trace), std::move(e)});
  });
  std::vector<CorpusItem> out;
  out.reserve(total);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string generate_demo_corpus(const std::string& dir, const DemoCorpusConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  auto items = render_demo_corpus(cfg);
  std::vector<ManifestEntry> entries;
  entries.reserve(items.size());
  for (auto& item : items) {
    const std::string name = item.entry.trace_path + ".csv";
    save_trace(item.trace, (std::filesystem::path(dir) / name).string(), TraceFormat::kCsv);
    ManifestEntry e = item.entry;
    e.trace_path = name;
    entries.push_back(std::move(e));
  }
  if (cfg.write_audio) {
    const auto speakers = demo_speakers();
    const auto& words = digit_word_templates();
    for (std::size_t s = 0; s < speakers.size(); ++s) {
      for (std::size_t w = 0; w < words.size(); ++w) {
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
          std::mt19937_64 rng(item_seed(cfg.seed, s, w, r));
          auto clip = render_word(words[w], speakers[s], cfg.audio_rate_hz, cfg.jitter, rng);
          const std::string name = words[w].word + "__" + speakers[s].id + "__" + speakers[s].gender + "__" +
                                   std::to_string(r) + ".wav";
          std::filesystem::create_directories(std::filesystem::path(dir) / "audio");
          save_audio(clip, (std::filesystem::path(dir) / "audio" / name).string());
        }
      }
    }
  }
  const std::string manifest = (std::filesystem::path(dir) / "manifest.csv").string();
  save_manifest(entries, manifest);
  return manifest;
}

SyntheticSentence render_sentence(std::size_t num_words, const SpeakerProfile& speaker, const ResponseModel& model,
                                  double gap_min_s, double gap_max_s, std::uint64_t seed, double audio_rate_hz) {
  if (num_words == 0) throw ConfigError("sentence: need at least one word");
  const auto& words = digit_word_templates();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_real_distribution<double> gap(gap_min_s, gap_max_s);
  UtteranceJitter jitter;

  std::vector<std::string> spoken;
  std::vector<double> audio(static_cast<std::size_t>(0.2 * audio_rate_hz), 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> audio_bounds;
  for (std::size_t i = 0; i < num_words; ++i) {
    const auto& w = words[pick(rng)];
    AudioClip clip = render_word(w, speaker, audio_rate_hz, jitter, rng);
    // render_word pads 50 ms of silence on both sides; the voiced span lies inside.
    const auto pad = static_cast<std::size_t>(0.05 * audio_rate_hz);
    if (i > 0) audio.insert(audio.end(), static_cast<std::size_t>(gap(rng) * audio_rate_hz), 0.0);
    const std::size_t begin = audio.size() + pad;
    audio.insert(audio.end(), clip.samples().begin(), clip.samples().end());
    audio_bounds.emplace_back(begin, audio.size() - pad);
    spoken.push_back(w.word);
  }
  audio.insert(audio.end(), static_cast<std::size_t>(0.2 * audio_rate_hz), 0.0);
  AudioClip sentence(audio_rate_hz, std::move(audio), "sentence");
  SyntheticSentence out{synthesize_trace(sentence, model), {}, std::move(spoken)};
  const auto lead = static_cast<std::size_t>(std::stoull(out.trace.meta().at("synth.speech_begin_idx")));
  const double ratio = audio_rate_hz / model.sensor_rate_hz;
  for (auto [b, e] : audio_bounds) {
    out.word_bounds.emplace_back(lead + static_cast<std::size_t>(std::ceil(static_cast<double>(b) / ratio)),
                                 lead + static_cast<std::size_t>(std::ceil(static_cast<double>(e) / ratio)));
  }
  return out;
}

}  // namespace vibespeech
