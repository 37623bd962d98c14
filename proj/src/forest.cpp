#include "vibespeech/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vibespeech/error.hpp"
#include "vibespeech/parallel.hpp"

namespace vibespeech {

void ForestConfig::validate(std::size_t num_features) const {
  if (num_features == 0) throw ConfigError("forest: dataset has no features");
  if (n_trees == 0) throw ConfigError("forest: n_trees must be >= 1");
  if (!(bag_fraction > 0.0 && bag_fraction <= 1.0)) throw ConfigError("forest: bag_fraction must be in (0, 1]");
  if (features_per_split > num_features) {
    throw ConfigError("forest: features_per_split exceeds feature count");
  }
  if (!(min_leaf >= 0.0)) throw ConfigError("forest: min_leaf must be non-negative");
}

std::size_t ForestConfig::resolved_features_per_split(std::size_t num_features) const {
  if (features_per_split != 0) return features_per_split;
  auto k = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(num_features)))) + 1;
  return std::min(k, num_features);
}

nlohmann::json ForestConfig::to_json() const {
  return {{"n_trees", n_trees},
          {"bag_fraction", bag_fraction},
          {"features_per_split", features_per_split},
          {"min_leaf", min_leaf},
          {"min_variance_split", min_variance_split},
          {"max_depth", max_depth},
          {"seed", seed},
          {"bootstrap", bootstrap},
          {"criterion", criterion == SplitCriterion::kEntropy ? "entropy" : "gini"}};
}

ForestConfig ForestConfig::from_json(const nlohmann::json& j) {
  ForestConfig c;
  c.n_trees = j.value("n_trees", c.n_trees);
  c.bag_fraction = j.value("bag_fraction", c.bag_fraction);
  c.features_per_split = j.value("features_per_split", c.features_per_split);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.min_variance_split = j.value("min_variance_split", c.min_variance_split);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.seed = j.value("seed", c.seed);
  c.bootstrap = j.value("bootstrap", c.bootstrap);
  const std::string crit = j.value("criterion", std::string("entropy"));
  if (crit == "entropy") {
    c.criterion = SplitCriterion::kEntropy;
  } else if (crit == "gini") {
    c.criterion = SplitCriterion::kGini;
  } else {
    throw ConfigError("forest: unknown criterion '" + crit + "'");
  }
  return c;
}

std::size_t DecisionTree::leaf_for(std::span<const double> row) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    node = row[static_cast<std::size_t>(feature[node])] <= threshold[node]
               ? static_cast<std::size_t>(left[node])
               : static_cast<std::size_t>(right[node]);
  }
  return node;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(node_count(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < node_count(); ++i) {
    best = std::max(best, d[i]);
    if (feature[i] >= 0) {
      d[static_cast<std::size_t>(left[i])] = d[i] + 1;
      d[static_cast<std::size_t>(right[i])] = d[i] + 1;
    }
  }
  return best;
}

ForestModel::ForestModel(std::vector<std::string> label_vocab, std::vector<std::string> feature_names,
                         ForestConfig config, std::vector<DecisionTree> trees)
    : Classifier(std::move(label_vocab), std::move(feature_names)),
      config_(config),
      trees_(std::move(trees)) {
  if (trees_.empty()) throw InvariantError("forest model: no trees");
  const auto d = static_cast<int>(this->feature_names().size());
  for (const auto& t : trees_) {
    const std::size_t nodes = t.feature.size();
    if (nodes == 0 || t.threshold.size() != nodes || t.left.size() != nodes ||
        t.right.size() != nodes || t.counts.size() != nodes) {
      throw InvariantError("forest model: inconsistent tree arrays");
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      if (t.feature[i] >= d) throw InvariantError("forest model: split feature out of range");
      if (t.feature[i] >= 0) {
        // Children always follow their parent, so traversal terminates.
        if (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) ||
            t.left[i] >= static_cast<int>(nodes) || t.right[i] >= static_cast<int>(nodes)) {
          throw InvariantError("forest model: bad child index");
        }
      } else if (t.counts[i].size() != this->label_vocab().size()) {
        throw InvariantError("forest model: leaf distribution width differs from vocabulary");
      }
    }
  }
}

std::vector<double> ForestModel::distribution(std::span<const double> row) const {
  const std::size_t classes = label_vocab().size();
  std::vector<double> out(classes, 0.0);
  for (const auto& t : trees_) {
    const auto& counts = t.counts[t.leaf_for(row)];
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) {
      for (double& v : out) v += 1.0 / static_cast<double>(classes);
      continue;
    }
    for (std::size_t c = 0; c < classes; ++c) out[c] += counts[c] / total;
  }
  for (double& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

namespace {

double impurity(const std::vector<double>& counts, double total, SplitCriterion crit) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  if (crit == SplitCriterion::kEntropy) {
    for (double c : counts) {
      if (c <= 0.0) continue;
      const double p = c / total;
      acc -= p * std::log(p);
    }
    return acc;
  }
  acc = 1.0;
  for (double c : counts) {
    const double p = c / total;
    acc -= p * p;
  }
  return acc;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const LabeledDataset& ds, const ForestConfig& cfg, std::uint64_t seed)
      : ds_(ds),
        cfg_(cfg),
        rng_(seed),
        classes_(ds.num_classes()),
        k_(cfg.resolved_features_per_split(ds.num_features())) {}

  DecisionTree grow(std::vector<std::size_t> rows) {
    build(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::size_t new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.counts.emplace_back();
    return tree_.feature.size() - 1;
  }

  std::vector<double> class_counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(classes_, 0.0);
    for (std::size_t r : rows) counts[ds_.label_indices()[r]] += 1.0;
    return counts;
  }

  // Best threshold on one feature; strict improvement keeps the lowest threshold on ties.
  SplitChoice best_split_on(std::size_t f, const std::vector<std::size_t>& rows,
                            const std::vector<double>& parent, double parent_imp) {
    const auto& x = ds_.rows();
    const auto& y = ds_.label_indices();
    scratch_.assign(rows.begin(), rows.end());
    std::sort(scratch_.begin(), scratch_.end(), [&](std::size_t a, std::size_t b) {
      return x[a][f] < x[b][f];
    });
    const auto total = static_cast<double>(rows.size());
    std::vector<double> left(classes_, 0.0);
    std::vector<double> right = parent;
    SplitChoice best;
    best.feature = static_cast<int>(f);
    best.gain = -1.0;
    for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
      const std::size_t c = y[scratch_[i]];
      left[c] += 1.0;
      right[c] -= 1.0;
      const double a = x[scratch_[i]][f];
      const double b = x[scratch_[i + 1]][f];
      if (!(a < b)) continue;
      const auto nl = static_cast<double>(i + 1);
      const double nr = total - nl;
      if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
      const double gain = parent_imp - (nl / total) * impurity(left, nl, cfg_.criterion) -
                          (nr / total) * impurity(right, nr, cfg_.criterion);
      if (gain > best.gain) {
        best.gain = gain;
        double mid = 0.5 * (a + b);
        best.threshold = (mid < b) ? mid : a;
      }
    }
    return best;
  }

  std::size_t build(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t node = new_node();
    auto counts = class_counts(rows);
    const auto total = static_cast<double>(rows.size());
    const double parent_imp = impurity(counts, total, cfg_.criterion);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    const bool depth_capped = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
    if (pure || depth_capped || total < 2.0 * cfg_.min_leaf || rows.size() < 2) {
      tree_.counts[node] = std::move(counts);
      return node;
    }

    const std::size_t d = ds_.num_features();
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng_);

    // Examine k features; keep drawing past k only while no useful split exists.
    SplitChoice best;
    best.gain = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (i >= k_ && found) break;
      SplitChoice s = best_split_on(perm[i], rows, counts, parent_imp);
      if (s.gain <= kMinGain) continue;
      const bool better = !found || s.gain > best.gain ||
                          (s.gain == best.gain && (s.feature < best.feature ||
                                                   (s.feature == best.feature && s.threshold < best.threshold)));
      if (better) best = s;
      found = true;
    }
    if (!found) {
      tree_.counts[node] = std::move(counts);
      return node;
    }

    std::vector<std::size_t> left_rows, right_rows;
    const auto f = static_cast<std::size_t>(best.feature);
    for (std::size_t r : rows) {
      (ds_.rows()[r][f] <= best.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.feature[node] = best.feature;
    tree_.threshold[node] = best.threshold;
    const std::size_t l = build(std::move(left_rows), depth + 1);
    const std::size_t r = build(std::move(right_rows), depth + 1);
    tree_.left[node] = static_cast<int>(l);
    tree_.right[node] = static_cast<int>(r);
    return node;
  }

  static constexpr double kMinGain = 1e-12;

  const LabeledDataset& ds_;
  const ForestConfig& cfg_;
  std::mt19937_64 rng_;
  std::size_t classes_;
  std::size_t k_;
  DecisionTree tree_;
  std::vector<std::size_t> scratch_;
};

}  // namespace

DecisionTree grow_tree(const LabeledDataset& ds, const std::vector<std::size_t>& rows,
                       const ForestConfig& cfg, std::uint64_t tree_seed) {
  cfg.validate(ds.num_features());
  if (rows.empty()) throw DataError("tree: no training rows");
  return TreeGrower(ds, cfg, tree_seed).grow(rows);
}

std::unique_ptr<ForestModel> train_forest(const LabeledDataset& ds, const ForestConfig& cfg) {
  cfg.validate(ds.num_features());
  const std::size_t n = ds.size();
  const auto bag = static_cast<std::size_t>(std::ceil(cfg.bag_fraction * static_cast<double>(n)));
  std::vector<DecisionTree> trees(cfg.n_trees);
  parallel_for(cfg.n_trees, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    std::vector<std::size_t> rows;
    if (cfg.bootstrap) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      rows.resize(bag);
      for (auto& r : rows) r = pick(rng);
      std::sort(rows.begin(), rows.end());
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    // Distinct stream from the bootstrap draw.
    trees[i] = grow_tree(ds, rows, cfg, seed * 0x9e3779b97f4a7c15ULL + 1);
  });
  return std::make_unique<ForestModel>(ds.label_vocab(), ds.feature_names(), cfg, std::move(trees));
}

std::unique_ptr<ForestModel> train_tree(const LabeledDataset& ds, ForestConfig cfg) {
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.bag_fraction = 1.0;
  cfg.features_per_split = ds.num_features();
  return train_forest(ds, cfg);
}

Trainer forest_trainer(ForestConfig cfg) {
  return [cfg](const LabeledDataset& ds) -> std::unique_ptr<Classifier> { return train_forest(ds, cfg); };
}

Trainer tree_trainer(ForestConfig cfg) {
  return [cfg](const LabeledDataset& ds) -> std::unique_ptr<Classifier> { return train_tree(ds, cfg); };
}

}  // namespace vibespeech
