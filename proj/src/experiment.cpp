#include "vibespeech/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/keywords.hpp"
#include "vibespeech/model_io.hpp"

namespace vibespeech {

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "forest") return ClassifierKind::kForest;
  if (s == "tree") return ClassifierKind::kTree;
  if (s == "logistic") return ClassifierKind::kLogistic;
  throw ConfigError("unknown classifier '" + s + "' (expected forest, tree or logistic)");
}

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kForest:
      return "forest";
    case ClassifierKind::kTree:
      return "tree";
    case ClassifierKind::kLogistic:
      return "logistic";
  }
  return "forest";
}

Task Task::parse(const std::string& s) {
  Task t;
  if (s == "gender") {
    t.kind = Kind::kGender;
  } else if (s == "speaker") {
    t.kind = Kind::kSpeaker;
  } else if (s == "word") {
    t.kind = Kind::kWord;
  } else if (s.rfind("ovo:", 0) == 0 && s.size() > 4) {
    t.kind = Kind::kOneVsOthers;
    t.target = s.substr(4);
  } else {
    throw ConfigError("unknown task '" + s + "' (expected gender, speaker, word or ovo:<speaker>)");
  }
  return t;
}

std::string Task::to_string() const {
  switch (kind) {
    case Kind::kGender:
      return "gender";
    case Kind::kSpeaker:
      return "speaker";
    case Kind::kWord:
      return "word";
    case Kind::kOneVsOthers:
      return "ovo:" + target;
  }
  return "speaker";
}

LabelColumn Task::label_column() const {
  switch (kind) {
    case Kind::kGender:
      return LabelColumn::kGender;
    case Kind::kWord:
      return LabelColumn::kLabel;
    case Kind::kSpeaker:
    case Kind::kOneVsOthers:
      break;
  }
  return LabelColumn::kSpeaker;
}

namespace {

nlohmann::json pipeline_to_json(const PipelineConfig& p) {
  return {{"segment_mode", to_string(p.segment_mode)},
          {"trim_edges", p.trim_edges},
          {"trim_head_s", p.trim_head_s},
          {"trim_tail_s", p.trim_tail_s},
          {"highpass_hz", p.highpass_hz},
          {"window_samples", p.region.window_samples},
          {"stride_samples", p.region.stride_samples},
          {"expand_frac", p.region.expand_frac},
          {"frame_samples", p.isolation.frame_samples},
          {"hop_samples", p.isolation.hop_samples},
          {"smooth_frames", p.isolation.smooth_frames},
          {"threshold_ratio", p.isolation.threshold_ratio},
          {"gap_min_s", p.isolation.gap_min_s},
          {"dur_min_s", p.isolation.dur_min_s},
          {"mfcc_frame_samples", p.mfcc.frame_samples},
          {"mfcc_hop_samples", p.mfcc.hop_samples},
          {"mfcc_filters", p.mfcc.num_filters},
          {"mfcc_coeffs", p.mfcc.num_coeffs}};
}

PipelineConfig pipeline_from_json(const nlohmann::json& j, PipelineConfig p) {
  if (j.contains("segment_mode")) p.segment_mode = parse_segment_mode(j.at("segment_mode").get<std::string>());
  p.trim_edges = j.value("trim_edges", p.trim_edges);
  p.trim_head_s = j.value("trim_head_s", p.trim_head_s);
  p.trim_tail_s = j.value("trim_tail_s", p.trim_tail_s);
  p.highpass_hz = j.value("highpass_hz", p.highpass_hz);
  p.region.window_samples = j.value("window_samples", p.region.window_samples);
  p.region.stride_samples = j.value("stride_samples", p.region.stride_samples);
  p.region.expand_frac = j.value("expand_frac", p.region.expand_frac);
  p.isolation.frame_samples = j.value("frame_samples", p.isolation.frame_samples);
  p.isolation.hop_samples = j.value("hop_samples", p.isolation.hop_samples);
  p.isolation.smooth_frames = j.value("smooth_frames", p.isolation.smooth_frames);
  p.isolation.threshold_ratio = j.value("threshold_ratio", p.isolation.threshold_ratio);
  p.isolation.gap_min_s = j.value("gap_min_s", p.isolation.gap_min_s);
  p.isolation.dur_min_s = j.value("dur_min_s", p.isolation.dur_min_s);
  p.mfcc.frame_samples = j.value("mfcc_frame_samples", p.mfcc.frame_samples);
  p.mfcc.hop_samples = j.value("mfcc_hop_samples", p.mfcc.hop_samples);
  p.mfcc.num_filters = j.value("mfcc_filters", p.mfcc.num_filters);
  p.mfcc.num_coeffs = j.value("mfcc_coeffs", p.mfcc.num_coeffs);
  return p;
}

nlohmann::json model_to_json(const ResponseModel& m) {
  return {{"band_lo_hz", m.band_lo_hz},   {"band_hi_hz", m.band_hi_hz},         {"sensor_rate_hz", m.sensor_rate_hz},
          {"axis_gain", m.axis_gain},     {"noise_sigma", m.noise_sigma},       {"volume_gain", m.volume_gain},
          {"gravity_offset", m.gravity_offset}, {"seed", m.seed}};
}

ResponseModel model_from_json(const nlohmann::json& j, ResponseModel m) {
  m.band_lo_hz = j.value("band_lo_hz", m.band_lo_hz);
  m.band_hi_hz = j.value("band_hi_hz", m.band_hi_hz);
  m.sensor_rate_hz = j.value("sensor_rate_hz", m.sensor_rate_hz);
  if (j.contains("axis_gain")) m.axis_gain = j.at("axis_gain").get<std::array<double, 3>>();
  m.noise_sigma = j.value("noise_sigma", m.noise_sigma);
  m.volume_gain = j.value("volume_gain", m.volume_gain);
  m.gravity_offset = j.value("gravity_offset", m.gravity_offset);
  m.seed = j.value("seed", m.seed);
  return m;
}

const std::set<std::string> kTopLevelKeys = {"manifest", "output_dir", "seed",     "task",      "classifier", "protocol",
                                             "features", "pipeline",   "forest",   "logistic",  "synthesis"};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelKeys.contains(key)) throw ConfigError("experiment config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    c.manifest = j.value("manifest", c.manifest);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("task")) c.task = Task::parse(j.at("task").get<std::string>());
    if (j.contains("classifier")) c.classifier = parse_classifier(j.at("classifier").get<std::string>());
    if (j.contains("protocol")) c.protocol = parse_protocol(j.at("protocol").get<std::string>());
    if (j.contains("pipeline")) c.pipeline = pipeline_from_json(j.at("pipeline"), c.pipeline);
    if (j.contains("features")) c.pipeline.feature_mode = parse_feature_mode(j.at("features").get<std::string>());
    if (j.contains("forest")) c.forest = ForestConfig::from_json(j.at("forest"));
    if (j.contains("logistic")) c.logistic = LogisticConfig::from_json(j.at("logistic"));
    if (j.contains("synthesis")) c.synthesis = model_from_json(j.at("synthesis"), c.synthesis);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.forest.seed = c.seed;
  c.pipeline.label_column = c.task.label_column();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json forest_json = forest.to_json();
  forest_json.erase("seed");
  return {{"manifest", manifest},
          {"output_dir", output_dir},
          {"seed", seed},
          {"task", task.to_string()},
          {"classifier", to_string(classifier)},
          {"protocol", to_string(protocol)},
          {"features", to_string(pipeline.feature_mode)},
          {"pipeline", pipeline_to_json(pipeline)},
          {"forest", forest_json},
          {"logistic", logistic.to_json()},
          {"synthesis", model_to_json(synthesis)}};
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  // A run manifest embeds the full config under "config".
  if (j.is_object() && j.contains("config") && j.contains("config_hash")) j = j.at("config");
  return ExperimentConfig::from_json(j);
}

StageError::StageError(std::string stage, std::string input, Category category, const std::string& detail)
    : Error("stage '" + stage + "' failed" + (input.empty() ? "" : " on '" + input + "'") + ": " + detail),
      stage_(std::move(stage)),
      input_(std::move(input)),
      category_(category) {}

Trainer make_trainer(const ExperimentConfig& cfg) {
  ForestConfig forest = cfg.forest;
  forest.seed = cfg.seed;
  switch (cfg.classifier) {
    case ClassifierKind::kForest:
      return forest_trainer(forest);
    case ClassifierKind::kTree:
      return tree_trainer(forest);
    case ClassifierKind::kLogistic:
      return logistic_trainer(cfg.logistic);
  }
  return forest_trainer(forest);
}

LabeledDataset apply_task(const LabeledDataset& ds, const Task& task) {
  if (task.kind == Task::Kind::kOneVsOthers) return binary_one_vs_others(ds, task.target);
  return ds;
}

EvalReport evaluate_dataset(const LabeledDataset& ds, const ExperimentConfig& cfg) {
  const auto trainer = make_trainer(cfg);
  if (cfg.protocol == Protocol::kCv10) return evaluate_cv(ds, trainer, 10, cfg.seed);
  return evaluate_split(ds, trainer, 0.66, cfg.seed);
}

namespace {

StageError::Category category_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return StageError::Category::kConfig;
  if (dynamic_cast<const Error*>(&e)) return StageError::Category::kData;
  return StageError::Category::kInternal;
}

template <typename F>
auto run_stage(const std::string& stage, const std::string& input, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, input, category_of(e), e.what());
  }
}

nlohmann::json report_document(const EvalReport& report, const ExperimentConfig& cfg, const LabeledDataset& ds) {
  nlohmann::json j = report.to_json();
  j["task"] = cfg.task.to_string();
  j["classifier"] = to_string(cfg.classifier);
  j["features"] = to_string(cfg.pipeline.feature_mode);
  j["rows"] = ds.size();
  j["pipeline_hash"] = ds.meta().count("pipeline_hash") ? ds.meta().at("pipeline_hash") : "";
  j["toolkit_version"] = kToolkitVersion;
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const bool write = !cfg.output_dir.empty();
  const fs::path out_dir(cfg.output_dir);
  nlohmann::json run_manifest{{"toolkit", "vibespeech"},
                              {"version", kToolkitVersion},
                              {"config", cfg.to_json()},
                              {"config_hash", cfg.hash()},
                              {"seed", cfg.seed}};
  auto fail_manifest = [&](const StageError& e) {
    if (!write) return;
    run_manifest["status"] = "failed";
    run_manifest["failed_stage"] = e.stage();
    run_manifest["error"] = e.what();
    run_manifest["partial_artifacts"] = true;
    try {
      write_text_file((out_dir / "run_manifest.json").string(), run_manifest.dump(1) + "\n");
    } catch (...) {
    }
  };

  try {
    if (write) {
      run_stage("config", cfg.output_dir, [&] {
        fs::create_directories(out_dir);
        return 0;
      });
    }
    auto manifest = run_stage("ingest", cfg.manifest, [&] {
      if (cfg.manifest.empty()) throw ConfigError("no manifest configured");
      if (!fs::exists(cfg.manifest)) throw IoError("manifest '" + cfg.manifest + "' does not exist");
      auto entries = load_manifest(cfg.manifest);
      if (entries.empty()) throw DataError("manifest has no rows");
      return entries;
    });
    PipelineConfig pipeline = cfg.pipeline;
    pipeline.label_column = cfg.task.label_column();
    auto build = run_stage("features", cfg.manifest, [&] { return build_dataset(manifest, pipeline); });
    LabeledDataset ds = run_stage("features", cfg.task.to_string(), [&] { return apply_task(build.dataset, cfg.task); });

    ExperimentResult result{run_stage("evaluate", cfg.manifest, [&] { return evaluate_dataset(ds, cfg); }),
                            ds.size(), build.skipped, "", "", "", ""};
    auto model = run_stage("train", cfg.manifest, [&] { return make_trainer(cfg)(ds); });

    if (write) {
      run_stage("write", cfg.output_dir, [&] {
        result.dataset_path = (out_dir / "dataset.csv").string();
        result.model_path = (out_dir / "model.json").string();
        result.report_path = (out_dir / "report.json").string();
        result.run_manifest_path = (out_dir / "run_manifest.json").string();
        save_dataset(ds, result.dataset_path);
        save_model(*model, result.model_path);
        write_text_file(result.report_path, report_document(result.report, cfg, ds).dump(1) + "\n");
        nlohmann::json skipped = nlohmann::json::array();
        for (const auto& s : build.skipped) skipped.push_back({{"trace_path", s.trace_path}, {"reason", s.reason}});
        run_manifest["status"] = "ok";
        run_manifest["rows"] = ds.size();
        run_manifest["pipeline_hash"] = ds.meta().at("pipeline_hash");
        run_manifest["skipped"] = skipped;
        run_manifest["artifacts"] = {"dataset.csv", "model.json", "report.json"};
        write_text_file(result.run_manifest_path, run_manifest.dump(1) + "\n");
        return 0;
      });
    }
    return result;
  } catch (const StageError& e) {
    fail_manifest(e);
    throw;
  }
}

nlohmann::json FeatureComparison::to_json() const {
  nlohmann::json delta = nlohmann::json::array();
  for (std::size_t c = 0; c < tf.label_vocab.size(); ++c) {
    delta.push_back({{"label", tf.label_vocab[c]},
                     {"f_tf", tf.metrics.per_class[c].f_measure},
                     {"f_mfcc", mfcc.metrics.per_class[c].f_measure},
                     {"delta", tf.metrics.per_class[c].f_measure - mfcc.metrics.per_class[c].f_measure}});
  }
  return {{"rows", rows},
          {"tf", tf.to_json()},
          {"mfcc", mfcc.to_json()},
          {"weighted_f_tf", tf.metrics.weighted_f},
          {"weighted_f_mfcc", mfcc.metrics.weighted_f},
          {"weighted_f_delta", tf.metrics.weighted_f - mfcc.metrics.weighted_f},
          {"per_class_delta", delta}};
}

FeatureComparison compare_feature_sets(const ExperimentConfig& cfg) {
  auto manifest = run_stage("ingest", cfg.manifest, [&] { return load_manifest(cfg.manifest); });
  FeatureComparison out{EvalReport{}, EvalReport{}, 0};
  for (FeatureMode mode : {FeatureMode::kTf, FeatureMode::kMfcc}) {
    PipelineConfig pipeline = cfg.pipeline;
    pipeline.feature_mode = mode;
    pipeline.label_column = cfg.task.label_column();
    auto build = run_stage("features", cfg.manifest, [&] { return build_dataset(manifest, pipeline); });
    LabeledDataset ds = apply_task(build.dataset, cfg.task);
    auto report = run_stage("evaluate", to_string(mode), [&] { return evaluate_dataset(ds, cfg); });
    if (mode == FeatureMode::kTf) {
      out.tf = std::move(report);
      out.rows = ds.size();
    } else {
      if (ds.size() != out.rows) {
        throw StageError("features", to_string(mode), StageError::Category::kData,
                         "feature modes produced different row counts");
      }
      out.mfcc = std::move(report);
    }
  }
  return out;
}

nlohmann::json KeywordSearchResult::to_json() const {
  return {{"keywords", keywords},
          {"threshold", threshold},
          {"keyword_mean_confidence", keyword_mean_confidence},
          {"marginal_mean_confidence", marginal_mean_confidence},
          {"keyword_recall", keyword_recall},
          {"marginal_accept_rate", marginal_accept_rate},
          {"keyword_confidences", keyword_confidences},
          {"marginal_confidences", marginal_confidences}};
}

KeywordSearchResult run_keyword_search(const LabeledDataset& words, const ForestConfig& forest, std::uint64_t seed,
                                       double keyword_fraction, double quantile) {
  const auto& vocab = words.label_vocab();
  if (vocab.size() < 2) throw DataError("keyword search: need at least two words");
  std::vector<std::string> shuffled = vocab;
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto n_kw = static_cast<std::size_t>(std::llround(keyword_fraction * static_cast<double>(vocab.size())));
  n_kw = std::clamp<std::size_t>(n_kw, 1, vocab.size() - 1);
  std::set<std::string> keywords(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_kw));

  auto split = stratified_split(words.label_indices(), words.num_classes(), 0.66, seed);
  std::vector<std::size_t> train_kw, calib_marginal;
  for (std::size_t i : split.train) {
    (keywords.contains(words.labels()[i]) ? train_kw : calib_marginal).push_back(i);
  }
  ForestConfig fc = forest;
  fc.seed = seed;
  auto model = train_forest(words.subset(train_kw), fc);

  auto score = [&](const std::vector<std::size_t>& idx) {
    std::vector<ScoredSegment> out;
    for (std::size_t i : idx) {
      auto p = model->predict_row(words.rows()[i]);
      out.push_back({i, p.label, p.confidence});
    }
    return out;
  };
  auto calib = score(calib_marginal);

  KeywordSearchResult r;
  r.keywords.assign(keywords.begin(), keywords.end());
  r.threshold = pick_keyword_threshold(calib, quantile);

  std::vector<std::size_t> test_kw, test_marginal;
  for (std::size_t i : split.test) {
    (keywords.contains(words.labels()[i]) ? test_kw : test_marginal).push_back(i);
  }
  auto kw_scores = score(test_kw);
  auto marg_scores = score(test_marginal);
  for (const auto& s : kw_scores) r.keyword_confidences.push_back(s.confidence);
  for (const auto& s : marg_scores) r.marginal_confidences.push_back(s.confidence);
  r.keyword_mean_confidence = keyword_confidence_cdf(kw_scores).mean();
  r.marginal_mean_confidence = keyword_confidence_cdf(marg_scores).mean();

  std::size_t hits = 0;
  for (const auto& s : keyword_filter(kw_scores, r.threshold)) {
    if (s.label == words.labels()[s.segment_id]) ++hits;
  }
  r.keyword_recall = static_cast<double>(hits) / static_cast<double>(kw_scores.size());
  r.marginal_accept_rate =
      static_cast<double>(keyword_filter(marg_scores, r.threshold).size()) / static_cast<double>(marg_scores.size());
  return r;
}

}  // namespace vibespeech
