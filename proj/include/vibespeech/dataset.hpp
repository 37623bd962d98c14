#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vibespeech/features.hpp"
#include "vibespeech/segment.hpp"
#include "vibespeech/synth.hpp"
#include "vibespeech/trace.hpp"

namespace vibespeech {

/// Feature matrix with one string label per row.
///
/// The label vocabulary is the sorted set of distinct labels, so label
/// indices (and every tie-break that uses them) are lexicographic.
class LabeledDataset {
 public:
  LabeledDataset(std::vector<std::string> feature_names, std::vector<std::vector<double>> rows,
                 std::vector<std::string> labels, Meta meta = {});

  std::size_t size() const { return rows_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }
  std::size_t num_classes() const { return vocab_.size(); }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& label_vocab() const { return vocab_; }
  /// Index of each row's label in label_vocab().
  const std::vector<std::size_t>& label_indices() const { return label_idx_; }
  const Meta& meta() const { return meta_; }

  FeatureVector row(std::size_t i) const { return FeatureVector(feature_names_, rows_[i]); }

  /// Rows at the given indices, in that order; meta is kept.
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
  LabeledDataset with_labels(std::vector<std::string> labels) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::string> labels_;
  std::vector<std::string> vocab_;
  std::vector<std::size_t> label_idx_;
  Meta meta_;
};

/// CSV with header `label,<feature names>`; meta as leading `# key=value` lines.
void save_dataset(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

struct ManifestEntry {
  std::string trace_path;  // resolved against the manifest's directory
  std::string label;
  std::string speaker;
  std::string gender;
};

/// Reads `trace_path,label[,speaker,gender]` with a header row.
std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

enum class FeatureMode { kTf, kMfcc };
enum class SegmentMode { kRegion, kWord };
enum class LabelColumn { kLabel, kSpeaker, kGender };

FeatureMode parse_feature_mode(const std::string& s);
SegmentMode parse_segment_mode(const std::string& s);
LabelColumn parse_label_column(const std::string& s);
std::string to_string(FeatureMode m);
std::string to_string(SegmentMode m);
std::string to_string(LabelColumn c);

/// Trace -> segments -> feature rows.
struct PipelineConfig {
  bool trim_edges = true;
  double trim_head_s = 5.0;
  double trim_tail_s = 2.0;
  double highpass_hz = 2.0;
  SegmentMode segment_mode = SegmentMode::kRegion;
  RegionConfig region;
  IsolationConfig isolation;
  FeatureMode feature_mode = FeatureMode::kTf;
  MfccConfig mfcc;
  LabelColumn label_column = LabelColumn::kLabel;

  /// Canonical text form; its FNV-1a hash identifies the pipeline in dataset meta.
  std::string canonical() const;
};

struct SkipRecord {
  std::string trace_path;
  std::string reason;
};

struct DatasetBuild {
  LabeledDataset dataset;
  std::vector<SkipRecord> skipped;
};

/// Segments of one preprocessed trace under the pipeline's segmentation mode.
std::vector<SpeechSegment> pipeline_segments(const SensorTrace& prepared, const PipelineConfig& cfg);

/// Trim and high-pass per the pipeline.
SensorTrace pipeline_prepare(const SensorTrace& raw, const PipelineConfig& cfg);

/// Feature rows for one raw trace (one per segment).
std::vector<FeatureVector> pipeline_features(const SensorTrace& raw, const PipelineConfig& cfg);

/// One row per (trace, segment) in manifest order. Unreadable traces and
/// traces yielding no segment go to the skip report; an empty result throws DataError.
DatasetBuild build_dataset(const std::vector<ManifestEntry>& manifest, const PipelineConfig& cfg);
DatasetBuild build_dataset(const std::string& manifest_path, const PipelineConfig& cfg);

/// Information gain (nats) of each feature after equal-frequency
/// discretisation into at most `bins` bins, sorted descending; ties keep
/// feature order.
std::vector<std::pair<std::string, double>> rank_features_info_gain(const LabeledDataset& ds,
                                                                    std::size_t bins = 10);

}  // namespace vibespeech
