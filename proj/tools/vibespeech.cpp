// vibespeech: command-line front end for the accelerometer speech toolkit.
//
//   vibespeech demo --out corpus/
//   vibespeech eval --config corpus/experiment.json --task gender --out runs/gender
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vibespeech/audio.hpp"
#include "vibespeech/csv.hpp"
#include "vibespeech/dataset.hpp"
#include "vibespeech/demo_corpus.hpp"
#include "vibespeech/experiment.hpp"
#include "vibespeech/model_io.hpp"
#include "vibespeech/segment.hpp"
#include "vibespeech/synth.hpp"
#include "vibespeech/trace.hpp"

namespace fs = std::filesystem;
using namespace vibespeech;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

// Flags shared by the experiment-style subcommands. Unset flags leave the
// config file's values alone.
struct Overrides {
  std::string config;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string task;
  std::string features;
  std::string classifier;
  std::string protocol;

  void attach(CLI::App* app, bool with_model_flags) {
    app->add_option("--config", config, "experiment config (JSON)");
    app->add_option("--manifest", manifest, "trace manifest CSV");
    app->add_option("--out", out, "output directory");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--task", task, "gender | speaker | word | ovo:<speaker>");
    app->add_option("--features", features, "tf | mfcc");
    if (with_model_flags) {
      app->add_option("--classifier", classifier, "forest | tree | logistic");
      app->add_option("--protocol", protocol, "cv10 | split66");
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_experiment_config(config);
    if (!manifest.empty()) cfg.manifest = manifest;
    if (!out.empty()) cfg.output_dir = out;
    if (seed) cfg.seed = *seed;
    if (!task.empty()) cfg.task = Task::parse(task);
    if (!features.empty()) cfg.pipeline.feature_mode = parse_feature_mode(features);
    if (!classifier.empty()) cfg.classifier = parse_classifier(classifier);
    if (!protocol.empty()) cfg.protocol = parse_protocol(protocol);
    cfg.forest.seed = cfg.seed;
    cfg.pipeline.label_column = cfg.task.label_column();
    return cfg;
  }
};

TraceFormat format_for(const std::string& path) {
  return fs::path(path).extension() == ".jsonl" ? TraceFormat::kJsonl : TraceFormat::kCsv;
}

void emit(const nlohmann::json& doc, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << doc.dump(1) << "\n";
  } else {
    write_text_file(out_file, doc.dump(1) + "\n");
    std::cout << out_file << "\n";
  }
}

void print_summary(const EvalReport& r, const std::string& what) {
  std::cout << what << ": weighted F " << r.metrics.weighted_f << ", macro F " << r.metrics.macro_f
            << ", accuracy " << r.metrics.accuracy << " (" << to_string(r.protocol) << ", seed " << r.seed << ")\n";
}

int run_demo(const std::string& out, std::uint64_t seed, std::size_t reps, double volume, bool audio) {
  if (out.empty()) throw ConfigError("demo: --out is required");
  DemoCorpusConfig dc;
  dc.seed = seed;
  dc.repetitions = reps;
  dc.model.volume_gain = volume;
  dc.write_audio = audio;
  const std::string manifest = generate_demo_corpus(out, dc);

  // A ready-to-run experiment config next to the corpus.
  ExperimentConfig cfg;
  cfg.manifest = fs::absolute(manifest).lexically_normal().string();
  cfg.output_dir = (fs::absolute(out) / "run").lexically_normal().string();
  cfg.seed = seed;
  cfg.synthesis = dc.model;
  const std::string cfg_path = (fs::path(out) / "experiment.json").string();
  write_text_file(cfg_path, cfg.to_json().dump(1) + "\n");
  std::cout << manifest << "\n" << cfg_path << "\n";
  return kExitOk;
}

struct SynthFlags {
  std::string audio, audio_dir, manifest, out, band;
  std::optional<double> rate, volume, noise;
  std::optional<std::uint64_t> seed;
  std::string config;
  // Longer than the 5 s / 2 s protocol trim so quiet context survives it.
  double lead_s = DemoCorpusConfig{}.lead_s;
  double trail_s = DemoCorpusConfig{}.trail_s;
};

ResponseModel synth_model(const SynthFlags& f) {
  ResponseModel m = f.config.empty() ? ResponseModel{} : load_experiment_config(f.config).synthesis;
  if (f.rate) m.sensor_rate_hz = *f.rate;
  if (f.volume) m.volume_gain = *f.volume;
  if (f.noise) m.noise_sigma = *f.noise;
  if (f.seed) m.seed = *f.seed;
  if (!f.band.empty()) {
    const auto colon = f.band.find(':');
    if (colon == std::string::npos) throw ConfigError("--band expects <lo:hi>, got '" + f.band + "'");
    m.band_lo_hz = parse_double(f.band.substr(0, colon), "--band");
    m.band_hi_hz = parse_double(f.band.substr(colon + 1), "--band");
  }
  m.validate();
  return m;
}

// WAV stems of the form word__speaker__gender[__rep] carry their labels.
ManifestEntry entry_for_stem(const std::string& stem, const std::string& trace_path) {
  ManifestEntry e{trace_path, stem, "", ""};
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = stem.find("__", pos);
    parts.push_back(stem.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  if (parts.size() >= 3) {
    e.label = parts[0];
    e.speaker = parts[1];
    e.gender = parts[2];
  }
  return e;
}

int run_synth(const SynthFlags& f) {
  const ResponseModel model = synth_model(f);
  if (!f.audio.empty()) {
    if (f.out.empty()) throw ConfigError("synth: --out is required with --audio");
    save_trace(synthesize_trace(load_audio(f.audio), model, f.lead_s, f.trail_s), f.out, format_for(f.out));
    std::cout << f.out << "\n";
    return kExitOk;
  }
  if (f.audio_dir.empty() || f.manifest.empty()) {
    throw ConfigError("synth: give --audio and --out, or --audio-dir and --manifest");
  }
  std::vector<fs::path> wavs;
  for (const auto& de : fs::directory_iterator(f.audio_dir)) {
    if (de.is_regular_file() && de.path().extension() == ".wav") wavs.push_back(de.path());
  }
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) throw DataError("synth: no .wav files in '" + f.audio_dir + "'");
  const fs::path out_dir = fs::path(f.manifest).parent_path();
  if (!out_dir.empty()) fs::create_directories(out_dir);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < wavs.size(); ++i) {
    ResponseModel m = model;
    m.seed = model.seed + i;
    const std::string name = wavs[i].stem().string() + ".csv";
    const SensorTrace tr = synthesize_trace(load_audio(wavs[i].string()), m, f.lead_s, f.trail_s);
    save_trace(tr, (out_dir / name).string(), TraceFormat::kCsv);
    entries.push_back(entry_for_stem(wavs[i].stem().string(), name));
  }
  save_manifest(entries, f.manifest);
  std::cout << f.manifest << " (" << entries.size() << " traces)\n";
  return kExitOk;
}

int run_segment(const std::string& input, const std::string& mode, const std::string& config,
                const std::string& out_file, const std::string& bounds_file) {
  PipelineConfig p = config.empty() ? PipelineConfig{} : load_experiment_config(config).pipeline;
  if (!mode.empty()) p.segment_mode = parse_segment_mode(mode);
  const SensorTrace raw = load_trace(input, format_for(input));
  const SensorTrace prepared = pipeline_prepare(raw, p);
  const auto found = pipeline_segments(prepared, p);
  nlohmann::json segs = nlohmann::json::array();
  std::string bounds = "start_idx,end_idx,start_s,end_s\n";
  // Report bounds against the input trace rather than the trimmed copy.
  const auto offset = static_cast<std::size_t>(
      std::lower_bound(raw.t().begin(), raw.t().end(), prepared.t().front() - 1e-9) - raw.t().begin());
  auto time_of = [&](std::size_t idx) { return raw.t().front() + static_cast<double>(idx) / raw.sample_rate_hz(); };
  for (const auto& s : found) {
    const std::size_t start = s.start_idx + offset;
    const std::size_t end = s.end_idx + offset;
    segs.push_back({{"start_idx", start},
                    {"end_idx", end},
                    {"start_s", time_of(start)},
                    {"end_s", time_of(end)},
                    {"peak", s.peak_variance},
                    {"baseline", s.baseline_variance},
                    {"speech", s.has_speech()}});
    bounds += std::to_string(start) + "," + std::to_string(end) + "," + format_double(time_of(start)) + "," +
              format_double(time_of(end)) + "\n";
  }
  if (!bounds_file.empty()) write_text_file(bounds_file, bounds);
  emit({{"trace", input}, {"mode", to_string(p.segment_mode)}, {"segments", segs}}, out_file);
  return kExitOk;
}

int run_features(const Overrides& o) {
  const ExperimentConfig cfg = o.resolve();
  if (cfg.output_dir.empty()) throw ConfigError("features: --out is required");
  auto build = build_dataset(cfg.manifest, cfg.pipeline);
  const LabeledDataset ds = apply_task(build.dataset, cfg.task);
  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "dataset.csv").string();
  save_dataset(ds, path);
  for (const auto& s : build.skipped) std::cerr << "skipped " << s.trace_path << ": " << s.reason << "\n";
  std::cout << path << " (" << ds.size() << " rows, " << ds.num_features() << " features)\n";
  return kExitOk;
}

int run_train(const Overrides& o, const std::string& dataset_path) {
  const ExperimentConfig cfg = o.resolve();
  if (cfg.output_dir.empty()) throw ConfigError("train: --out is required");
  LabeledDataset ds = dataset_path.empty()
                          ? apply_task(build_dataset(cfg.manifest, cfg.pipeline).dataset, cfg.task)
                          : load_dataset(dataset_path);
  auto model = make_trainer(cfg)(ds);
  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "model.json").string();
  save_model(*model, path);
  std::cout << path << " (" << model->kind() << ", " << ds.size() << " rows)\n";
  return kExitOk;
}

int run_eval(const Overrides& o, bool compare) {
  const ExperimentConfig cfg = o.resolve();
  if (compare) {
    const FeatureComparison cmp = compare_feature_sets(cfg);
    print_summary(cmp.tf, "tf");
    print_summary(cmp.mfcc, "mfcc");
    std::cout << "delta (tf - mfcc): " << cmp.tf.metrics.weighted_f - cmp.mfcc.metrics.weighted_f << "\n";
    if (!cfg.output_dir.empty()) {
      fs::create_directories(cfg.output_dir);
      write_text_file((fs::path(cfg.output_dir) / "comparison.json").string(), cmp.to_json().dump(1) + "\n");
    }
    return kExitOk;
  }
  const ExperimentResult r = run_experiment(cfg);
  print_summary(r.report, cfg.task.to_string());
  if (!r.skipped.empty()) std::cerr << r.skipped.size() << " trace(s) skipped\n";
  if (!r.report_path.empty()) std::cout << r.report_path << "\n";
  return kExitOk;
}

int run_keywords(const Overrides& o, double fraction, double quantile) {
  ExperimentConfig cfg = o.resolve();
  cfg.task = Task::parse("word");
  cfg.pipeline.label_column = LabelColumn::kLabel;
  auto build = build_dataset(cfg.manifest, cfg.pipeline);
  const KeywordSearchResult r = run_keyword_search(build.dataset, cfg.forest, cfg.seed, fraction, quantile);
  std::cout << "threshold " << r.threshold << ", keyword mean confidence " << r.keyword_mean_confidence
            << ", marginal mean confidence " << r.marginal_mean_confidence << ", keyword recall "
            << r.keyword_recall << ", marginal accept rate " << r.marginal_accept_rate << "\n";
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    write_text_file((fs::path(cfg.output_dir) / "keywords.json").string(), r.to_json().dump(1) + "\n");
  }
  return kExitOk;
}

int exit_code_for(const StageError& e) {
  switch (e.category()) {
    case StageError::Category::kConfig:
      return kExitConfig;
    case StageError::Category::kData:
      return kExitData;
    case StageError::Category::kInternal:
      break;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech eavesdropping through smartphone accelerometers"};
  app.require_subcommand(1);

  std::uint64_t demo_seed = 1;
  std::size_t demo_reps = DemoCorpusConfig{}.repetitions;
  double demo_volume = 1.0;
  bool demo_audio = false;
  std::string demo_out;
  auto* demo = app.add_subcommand("demo", "generate the synthetic digit corpus and an experiment config");
  demo->add_option("--out", demo_out, "corpus directory")->required();
  demo->add_option("--seed", demo_seed, "corpus seed");
  demo->add_option("--reps", demo_reps, "repetitions per speaker and word")->check(CLI::PositiveNumber);
  demo->add_option("--volume", demo_volume, "playback volume gain")->check(CLI::Range(0.0, 1.0));
  demo->add_flag("--audio", demo_audio, "also write the rendered WAV files");

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "turn WAV recordings into accelerometer traces");
  synth->add_option("--audio", sf.audio, "single WAV file");
  synth->add_option("--out", sf.out, "trace file for --audio (.csv or .jsonl)");
  synth->add_option("--audio-dir", sf.audio_dir, "directory of WAV files (batch mode)");
  synth->add_option("--manifest", sf.manifest, "manifest CSV written in batch mode, traces beside it");
  synth->add_option("--rate", sf.rate, "accelerometer rate in Hz");
  synth->add_option("--band", sf.band, "acoustic pass band <lo:hi> in Hz");
  synth->add_option("--volume", sf.volume, "playback volume gain in (0, 1]");
  synth->add_option("--noise", sf.noise, "sensor noise std in m/s^2");
  synth->add_option("--seed", sf.seed, "noise seed");
  synth->add_option("--lead", sf.lead_s, "seconds of silence before the speech")->check(CLI::NonNegativeNumber);
  synth->add_option("--trail", sf.trail_s, "seconds of silence after the speech")->check(CLI::NonNegativeNumber);
  synth->add_option("--config", sf.config, "experiment config with a synthesis section");

  std::string seg_in, seg_mode, seg_out, seg_bounds, seg_config;
  auto* segment = app.add_subcommand("segment", "locate speech in a trace");
  segment->add_option("--trace", seg_in, "trace file (.csv or .jsonl)")->required();
  segment->add_option("--mode", seg_mode, "region | word");
  segment->add_option("--config", seg_config, "experiment config with a pipeline section");
  segment->add_option("--emit-bounds", seg_bounds, "write start_idx,end_idx,start_s,end_s CSV here");
  segment->add_option("--out", seg_out, "write segments JSON here instead of stdout");

  Overrides feat_o;
  auto* features = app.add_subcommand("features", "build the feature dataset for a manifest");
  feat_o.attach(features, false);

  Overrides train_o;
  std::string train_dataset;
  auto* train = app.add_subcommand("train", "train a classifier and save the model");
  train_o.attach(train, true);
  train->add_option("--dataset", train_dataset, "feature CSV from `features` instead of a manifest");

  Overrides eval_o;
  bool eval_compare = false;
  auto* eval = app.add_subcommand("eval", "run an experiment: features, evaluation, final model, report");
  eval_o.attach(eval, true);
  eval->add_flag("--compare", eval_compare, "evaluate TF and MFCC features on the same folds");

  Overrides kw_o;
  double kw_fraction = 2.0 / 3.0;
  double kw_quantile = 0.95;
  auto* keywords = app.add_subcommand("keywords", "keyword search with a confidence threshold");
  kw_o.attach(keywords, false);
  keywords->add_option("--fraction", kw_fraction, "share of the vocabulary used as keywords")
      ->check(CLI::Range(0.0, 1.0));
  keywords->add_option("--quantile", kw_quantile, "marginal-confidence quantile used as threshold")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*demo) return run_demo(demo_out, demo_seed, demo_reps, demo_volume, demo_audio);
    if (*synth) return run_synth(sf);
    if (*segment) return run_segment(seg_in, seg_mode, seg_config, seg_out, seg_bounds);
    if (*features) return run_features(feat_o);
    if (*train) return run_train(train_o, train_dataset);
    if (*eval) return run_eval(eval_o, eval_compare);
    if (*keywords) return run_keywords(kw_o, kw_fraction, kw_quantile);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
