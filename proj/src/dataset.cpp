#include "vibespeech/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/parallel.hpp"

namespace vibespeech {

LabeledDataset::LabeledDataset(std::vector<std::string> feature_names,
                               std::vector<std::vector<double>> rows,
                               std::vector<std::string> labels, Meta meta)
    : feature_names_(std::move(feature_names)),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      meta_(std::move(meta)) {
  if (rows_.empty()) throw DataError("dataset: empty");
  if (rows_.size() != labels_.size()) throw InvariantError("dataset: rows and labels differ in length");
  for (const auto& r : rows_) {
    if (r.size() != feature_names_.size()) throw InvariantError("dataset: row width differs from feature count");
    for (double v : r) {
      if (!std::isfinite(v)) throw InvariantError("dataset: non-finite feature value");
    }
  }
  std::set<std::string> distinct(labels_.begin(), labels_.end());
  vocab_.assign(distinct.begin(), distinct.end());
  label_idx_.reserve(labels_.size());
  for (const auto& l : labels_) {
    label_idx_.push_back(static_cast<std::size_t>(
        std::lower_bound(vocab_.begin(), vocab_.end(), l) - vocab_.begin()));
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  rows.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    rows.push_back(rows_.at(i));
    labels.push_back(labels_.at(i));
  }
  return LabeledDataset(feature_names_, std::move(rows), std::move(labels), meta_);
}

LabeledDataset LabeledDataset::with_labels(std::vector<std::string> labels) const {
  return LabeledDataset(feature_names_, rows_, std::move(labels), meta_);
}

void save_dataset(const LabeledDataset& ds, const std::string& path) {
  std::string out;
  for (const auto& [k, v] : ds.meta()) out += "# " + k + "=" + v + "\n";
  out += "label";
  for (const auto& n : ds.feature_names()) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += ds.labels()[i];
    for (double v : ds.rows()[i]) out += "," + format_double(v);
    out += "\n";
  }
  write_text_file(path, out);
}

LabeledDataset load_dataset(const std::string& path) {
  auto lines = read_lines(path);
  Meta meta;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  bool header = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (line.front() == '#') {
      line.remove_prefix(1);
      line = trim(line);
      auto eq = line.find('=');
      if (eq != std::string_view::npos) {
        meta[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
      }
      continue;
    }
    auto fields = split_fields(line);
    if (!header) {
      if (fields.empty() || trim(fields[0]) != "label") throw ParseError(where + ": expected header starting with 'label'");
      for (std::size_t i = 1; i < fields.size(); ++i) names.emplace_back(trim(fields[i]));
      header = true;
      continue;
    }
    if (fields.size() != names.size() + 1) throw ParseError(where + ": wrong field count");
    labels.emplace_back(trim(fields[0]));
    std::vector<double> row(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) row[i] = parse_double(fields[i + 1], where);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": empty dataset");
  return LabeledDataset(std::move(names), std::move(rows), std::move(labels), std::move(meta));
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  auto lines = read_lines(path);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> out;
  bool header = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = path + ":" + std::to_string(ln + 1);
    auto fields = split_fields(line);
    if (!header) {
      if (fields.size() < 2 || trim(fields[0]) != "trace_path" || trim(fields[1]) != "label") {
        throw ParseError(where + ": expected header 'trace_path,label[,speaker,gender]'");
      }
      header = true;
      continue;
    }
    if (fields.size() < 2 || fields.size() > 4) throw ParseError(where + ": expected 2 to 4 fields");
    ManifestEntry e;
    std::filesystem::path p{std::string(trim(fields[0]))};
    e.trace_path = p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
    e.label = std::string(trim(fields[1]));
    if (fields.size() > 2) e.speaker = std::string(trim(fields[2]));
    if (fields.size() > 3) e.gender = std::string(trim(fields[3]));
    out.push_back(std::move(e));
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::string out = "trace_path,label,speaker,gender\n";
  for (const auto& e : entries) {
    out += e.trace_path + "," + e.label + "," + e.speaker + "," + e.gender + "\n";
  }
  write_text_file(path, out);
}

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "tf") return FeatureMode::kTf;
  if (s == "mfcc") return FeatureMode::kMfcc;
  throw ConfigError("unknown feature mode '" + s + "' (expected tf or mfcc)");
}

SegmentMode parse_segment_mode(const std::string& s) {
  if (s == "region") return SegmentMode::kRegion;
  if (s == "word") return SegmentMode::kWord;
  throw ConfigError("unknown segment mode '" + s + "' (expected region or word)");
}

LabelColumn parse_label_column(const std::string& s) {
  if (s == "label" || s == "word") return LabelColumn::kLabel;
  if (s == "speaker") return LabelColumn::kSpeaker;
  if (s == "gender") return LabelColumn::kGender;
  throw ConfigError("unknown label column '" + s + "' (expected label, speaker or gender)");
}

std::string to_string(FeatureMode m) { return m == FeatureMode::kTf ? "tf" : "mfcc"; }
std::string to_string(SegmentMode m) { return m == SegmentMode::kRegion ? "region" : "word"; }
std::string to_string(LabelColumn c) {
  switch (c) {
    case LabelColumn::kLabel:
      return "label";
    case LabelColumn::kSpeaker:
      return "speaker";
    case LabelColumn::kGender:
      return "gender";
  }
  return "label";
}

std::string PipelineConfig::canonical() const {
  std::ostringstream os;
  os << "trim=" << trim_edges << ";head=" << format_double(trim_head_s)
     << ";tail=" << format_double(trim_tail_s) << ";highpass=" << format_double(highpass_hz)
     << ";segment=" << to_string(segment_mode) << ";window=" << region.window_samples
     << ";stride=" << region.stride_samples << ";expand=" << format_double(region.expand_frac)
     << ";frame=" << isolation.frame_samples << ";hop=" << isolation.hop_samples
     << ";smooth=" << isolation.smooth_frames << ";tau=" << format_double(isolation.threshold_ratio)
     << ";gap=" << format_double(isolation.gap_min_s) << ";dur=" << format_double(isolation.dur_min_s)
     << ";features=" << to_string(feature_mode) << ";mfcc_frame=" << mfcc.frame_samples
     << ";mfcc_hop=" << mfcc.hop_samples << ";mfcc_filters=" << mfcc.num_filters
     << ";mfcc_coeffs=" << mfcc.num_coeffs << ";label=" << to_string(label_column);
  return os.str();
}

SensorTrace pipeline_prepare(const SensorTrace& raw, const PipelineConfig& cfg) {
  SensorTrace trimmed = cfg.trim_edges ? trim_protocol_edges(raw, cfg.trim_head_s, cfg.trim_tail_s) : raw;
  return highpass_motion_filter(trimmed, cfg.highpass_hz);
}

std::vector<SpeechSegment> pipeline_segments(const SensorTrace& prepared, const PipelineConfig& cfg) {
  if (cfg.segment_mode == SegmentMode::kWord) return isolate_words(prepared, cfg.isolation);
  auto seg = detect_speech_region(prepared, cfg.region);
  if (!seg.has_speech()) return {};
  return {seg};
}

std::vector<FeatureVector> pipeline_features(const SensorTrace& raw, const PipelineConfig& cfg) {
  SensorTrace prepared = pipeline_prepare(raw, cfg);
  std::vector<FeatureVector> out;
  for (const auto& seg : pipeline_segments(prepared, cfg)) {
    if (cfg.feature_mode == FeatureMode::kTf) {
      out.push_back(extract_tf_features(prepared, seg));
    } else {
      out.push_back(extract_mfcc_features(prepared, seg, cfg.mfcc));
    }
  }
  return out;
}

namespace {

const std::string& pick_label(const ManifestEntry& e, LabelColumn c) {
  switch (c) {
    case LabelColumn::kSpeaker:
      return e.speaker;
    case LabelColumn::kGender:
      return e.gender;
    case LabelColumn::kLabel:
      break;
  }
  return e.label;
}

}  // namespace

DatasetBuild build_dataset(const std::vector<ManifestEntry>& manifest, const PipelineConfig& cfg) {
  if (manifest.empty()) throw DataError("build dataset: empty manifest");
  struct Slot {
    std::vector<FeatureVector> rows;
    std::string error;
  };
  std::vector<Slot> slots(manifest.size());
  parallel_for(manifest.size(), [&](std::size_t i) {
    const auto& e = manifest[i];
    try {
      if (pick_label(e, cfg.label_column).empty()) {
        slots[i].error = "empty " + to_string(cfg.label_column) + " label";
        return;
      }
      auto trace = load_trace(e.trace_path, TraceFormat::kCsv);
      slots[i].rows = pipeline_features(trace, cfg);
      if (slots[i].rows.empty()) slots[i].error = "no speech segment found";
    } catch (const Error& err) {
      slots[i].rows.clear();
      slots[i].error = err.what();
    }
  });

  std::vector<std::string> names = cfg.feature_mode == FeatureMode::kTf
                                       ? tf_feature_names()
                                       : mfcc_feature_names(cfg.mfcc);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::vector<SkipRecord> skipped;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!slots[i].error.empty()) {
      skipped.push_back({manifest[i].trace_path, slots[i].error});
      continue;
    }
    for (auto& fv : slots[i].rows) {
      rows.push_back(fv.values());
      labels.push_back(pick_label(manifest[i], cfg.label_column));
    }
  }
  if (rows.empty()) throw DataError("build dataset: every trace was skipped (empty dataset)");
  Meta meta{{"pipeline", cfg.canonical()},
            {"pipeline_hash", hex64(fnv1a64(cfg.canonical()))},
            {"skipped", std::to_string(skipped.size())}};
  return {LabeledDataset(std::move(names), std::move(rows), std::move(labels), std::move(meta)),
          std::move(skipped)};
}

DatasetBuild build_dataset(const std::string& manifest_path, const PipelineConfig& cfg) {
  return build_dataset(load_manifest(manifest_path), cfg);
}

}  // namespace vibespeech
