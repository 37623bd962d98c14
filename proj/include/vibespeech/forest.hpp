#pragma once

#include <cstdint>
#include <optional>

#include "vibespeech/classifier.hpp"

namespace vibespeech {

enum class SplitCriterion { kEntropy, kGini };

/// Random forest hyper-parameters. Defaults follow the usual Weka
/// RandomForest settings: 100 trees, 100% bag, log2 rule for features per
/// split, min leaf weight 1, seed 1.
struct ForestConfig {
  std::size_t n_trees = 100;
  double bag_fraction = 1.0;
  /// 0 selects floor(log2 d) + 1.
  std::size_t features_per_split = 0;
  double min_leaf = 1.0;
  /// Weka's -V; only meaningful for numeric targets, kept for config parity.
  double min_variance_split = 1e-3;
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  std::uint64_t seed = 1;
  bool bootstrap = true;
  SplitCriterion criterion = SplitCriterion::kEntropy;

  void validate(std::size_t num_features) const;
  std::size_t resolved_features_per_split(std::size_t num_features) const;
  nlohmann::json to_json() const;
  static ForestConfig from_json(const nlohmann::json& j);
};

/// Axis-aligned binary tree stored as flat arrays. Node 0 is the root.
/// Internal nodes send row[feature] <= threshold left.
struct DecisionTree {
  std::vector<int> feature;  // -1 marks a leaf
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<std::vector<double>> counts;  // class weights at leaves, empty at internal nodes

  std::size_t leaf_for(std::span<const double> row) const;
  std::size_t node_count() const { return feature.size(); }
  std::size_t depth() const;
};

class ForestModel final : public Classifier {
 public:
  ForestModel(std::vector<std::string> label_vocab, std::vector<std::string> feature_names,
              ForestConfig config, std::vector<DecisionTree> trees);

  const ForestConfig& config() const { return config_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Mean over trees of each leaf's normalised class distribution.
  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json to_json() const override;
  std::string kind() const override { return "forest"; }

  static std::unique_ptr<ForestModel> from_json(const nlohmann::json& j);

 private:
  ForestConfig config_;
  std::vector<DecisionTree> trees_;
};

/// Grows one tree on the given row multiset. Exposed for tests and oracles.
DecisionTree grow_tree(const LabeledDataset& ds, const std::vector<std::size_t>& rows,
                       const ForestConfig& cfg, std::uint64_t tree_seed);

/// Bagged forest; tree i uses seed ^ i, so parallel growth matches sequential.
std::unique_ptr<ForestModel> train_forest(const LabeledDataset& ds, const ForestConfig& cfg = {});

/// Single unbagged tree considering every feature at each split.
std::unique_ptr<ForestModel> train_tree(const LabeledDataset& ds, ForestConfig cfg = {});

Trainer forest_trainer(ForestConfig cfg = {});
Trainer tree_trainer(ForestConfig cfg = {});

}  // namespace vibespeech
