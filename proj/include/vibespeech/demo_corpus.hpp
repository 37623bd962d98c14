#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vibespeech/audio.hpp"
#include "vibespeech/dataset.hpp"
#include "vibespeech/synth.hpp"

namespace vibespeech {

/// Synthetic speaker. Identity shows up in pitch, vocal-tract scale,
/// loudness, speaking tempo and a breathy onset before each vowel.
struct SpeakerProfile {
  std::string id;
  std::string gender;  // "female" or "male"
  double f0_hz = 120.0;
  double formant_scale = 1.0;
  double tilt_db_per_octave = -12.0;  // glottal buzz harmonic roll-off
  double loudness = 0.7;              // vowel RMS relative to the corpus level
  double f0_slope = 0.0;              // relative pitch change across a syllable
  double tempo = 1.0;                 // duration multiplier, > 1 is slower
  double breathiness = 0.0;           // std of the breath noise before each vowel
};

/// One syllable of a word template. The vowel is a sine at F1 plus
/// partials at 2*F1 (cosine) and 3*F1 (sine) locked to its phase, so the
/// waveform shape and hence the amplitude distribution is fixed per word.
/// Aliasing scrambles frequencies but keeps that distribution.
struct Syllable {
  double duration_s = 0.0;
  double f1_hz = 0.0;
  double tone = 1.0;
  std::array<double, 2> partials{0.0, 0.0};
  double fricative_s = 0.0;  // leading unvoiced noise, 0 for none
  double level = 1.0;        // relative to the loudest syllable
  double tail = 1.0;         // level at the end of the vowel relative to its start
  double pause_s = 0.0;      // closure silence before the syllable
};

struct WordTemplate {
  std::string word;
  std::vector<Syllable> syllables;
};

/// The eleven digit words ("zero".."nine", "oh"), each a sequence of
/// syllables over a weak glottal buzz. Parameters are fixed toolkit
/// conventions.
const std::vector<WordTemplate>& digit_word_templates();

/// Five male (f0 110-150 Hz) then five female (f0 190-230 Hz) speakers.
std::vector<SpeakerProfile> demo_speakers();

/// Per-utterance relative variation, drawn uniformly in [-v, v].
struct UtteranceJitter {
  double f0 = 0.01;
  double duration = 0.03;
  double formant = 0.03;
  double amplitude = 0.04;
};

/// Renders one spoken word at `audio_rate_hz` with per-utterance variation drawn from rng.
AudioClip render_word(const WordTemplate& word, const SpeakerProfile& speaker, double audio_rate_hz,
                      const UtteranceJitter& jitter, std::mt19937_64& rng);

struct DemoCorpusConfig {
  std::size_t repetitions = 6;
  double audio_rate_hz = 8000.0;
  ResponseModel model = [] {
    ResponseModel m;
    m.sensor_rate_hz = 250.0;
    m.noise_sigma = 0.005;
    return m;
  }();
  UtteranceJitter jitter;
  /// Silence before and after each word. Both outlast the 5 s / 2 s protocol
  /// trim so a second of quiet context survives preprocessing on each side.
  double lead_s = 6.0;
  double trail_s = 3.0;
  std::uint64_t seed = 1;
  bool write_audio = false;
};

/// Renders, synthesises and writes every (speaker, word, repetition) trace
/// as CSV under `dir`, plus `dir/manifest.csv` with
/// `trace_path,label,speaker,gender`. Returns the manifest path.
std::string generate_demo_corpus(const std::string& dir, const DemoCorpusConfig& cfg = {});

/// In-memory variant of the corpus: one entry per trace, in manifest order.
struct CorpusItem {
  SensorTrace trace;
  ManifestEntry entry;
};
std::vector<CorpusItem> render_demo_corpus(const DemoCorpusConfig& cfg = {});

/// A continuous utterance of several words with silent gaps, and the
/// ground-truth word intervals in sensor-sample indices of the synthesised trace.
struct SyntheticSentence {
  SensorTrace trace;
  std::vector<std::pair<std::size_t, std::size_t>> word_bounds;
  std::vector<std::string> words;
};

SyntheticSentence render_sentence(std::size_t num_words, const SpeakerProfile& speaker,
                                  const ResponseModel& model, double gap_min_s, double gap_max_s,
                                  std::uint64_t seed, double audio_rate_hz = 8000.0);

}  // namespace vibespeech
