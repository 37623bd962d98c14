#include <doctest.h>

#include <map>
#include <set>

#include "test_util.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/evaluate.hpp"
#include "vibespeech/forest.hpp"
#include "vibespeech/keywords.hpp"
#include "vibespeech/logistic.hpp"
#include "vibespeech/model_io.hpp"

using namespace vibespeech;

namespace {

// Two Gaussian blobs per class along a random direction, far apart.
LabeledDataset blobs(std::size_t per_class, std::size_t classes, std::size_t dims, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::vector<std::string> names;
  for (std::size_t d = 0; d < dims; ++d) names.push_back("f" + std::to_string(d));
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> r(dims);
      for (std::size_t d = 0; d < dims; ++d) r[d] = g(rng) + (d == c % dims ? gap * static_cast<double>(c / dims + 1) : 0.0);
      rows.push_back(std::move(r));
      labels.push_back("k" + std::to_string(c));
    }
  }
  return LabeledDataset(names, rows, labels);
}

// Always predicts the training set's most frequent class.
class MajorityModel final : public Classifier {
 public:
  MajorityModel(const LabeledDataset& ds) : Classifier(ds.label_vocab(), ds.feature_names()) {
    std::vector<std::size_t> counts(ds.num_classes(), 0);
    for (std::size_t c : ds.label_indices()) ++counts[c];
    best_ = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
  std::vector<double> distribution(std::span<const double>) const override {
    std::vector<double> d(label_vocab().size(), 0.0);
    d[best_] = 1.0;
    return d;
  }
  nlohmann::json to_json() const override { return {}; }
  std::string kind() const override { return "majority"; }

 private:
  std::size_t best_ = 0;
};

double accuracy_on(const Classifier& m, const LabeledDataset& ds) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) ok += m.predict_row(ds.rows()[i]).label == ds.labels()[i];
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

double entropy(const std::vector<double>& counts) {
  double t = 0.0, h = 0.0;
  for (double c : counts) t += c;
  for (double c : counts) {
    if (c > 0.0) h -= c / t * std::log(c / t);
  }
  return h;
}

// Exhaustive greedy tree on one feature: at each node try every cut between
// consecutive distinct values and keep the best gain (lowest cut on ties).
struct OracleNode {
  bool leaf = true;
  double cut = 0.0;
  std::vector<double> counts;
  std::unique_ptr<OracleNode> lo, hi;
};

std::unique_ptr<OracleNode> oracle_grow(const std::vector<std::pair<double, std::size_t>>& pts, std::size_t classes,
                                        std::size_t depth_left) {
  auto node = std::make_unique<OracleNode>();
  node->counts.assign(classes, 0.0);
  for (const auto& p : pts) node->counts[p.second] += 1.0;
  std::set<double> values;
  for (const auto& p : pts) values.insert(p.first);
  if (depth_left == 0 || values.size() < 2) return node;
  const double parent = entropy(node->counts);
  double best_gain = 1e-12;
  std::optional<double> best_cut;
  for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
    const double cut = 0.5 * (*it + *std::next(it));
    std::vector<double> l(classes, 0.0), r(classes, 0.0);
    double nl = 0.0, nr = 0.0;
    for (const auto& p : pts) {
      if (p.first <= cut) {
        l[p.second] += 1.0;
        nl += 1.0;
      } else {
        r[p.second] += 1.0;
        nr += 1.0;
      }
    }
    const double n = nl + nr;
    const double gain = parent - nl / n * entropy(l) - nr / n * entropy(r);
    if (gain > best_gain) {
      best_gain = gain;
      best_cut = cut;
    }
  }
  if (!best_cut) return node;
  node->leaf = false;
  node->cut = *best_cut;
  std::vector<std::pair<double, std::size_t>> a, b;
  for (const auto& p : pts) (p.first <= node->cut ? a : b).push_back(p);
  node->lo = oracle_grow(a, classes, depth_left - 1);
  node->hi = oracle_grow(b, classes, depth_left - 1);
  return node;
}

const std::vector<double>& oracle_leaf(const OracleNode& n, double v) {
  if (n.leaf) return n.counts;
  return oracle_leaf(v <= n.cut ? *n.lo : *n.hi, v);
}

}  // namespace

TEST_CASE("metrics from a 2x2 confusion") {
  const auto m = metrics_from_confusion({{3, 1}, {2, 4}});
  CHECK(m.per_class[0].precision == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.per_class[0].recall == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.per_class[0].f_measure == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_class[1].precision == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.per_class[1].recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.per_class[0].support == 4);
  CHECK_THROWS_AS(metrics_from_confusion({{1, 2}, {3}}), InvariantError);
}

TEST_CASE("metrics guard empty rows and columns") {
  const auto m = metrics_from_confusion({{5, 0, 0}, {0, 0, 0}, {2, 0, 0}});
  CHECK(m.per_class[1].precision == 0.0);
  CHECK(m.per_class[1].recall == 0.0);
  CHECK(m.per_class[1].f_measure == 0.0);
  CHECK(m.per_class[2].precision == 0.0);
  CHECK(m.per_class[0].precision == doctest::Approx(5.0 / 7.0));
}

TEST_CASE("stratified folds deal each class evenly") {
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 100; ++i) labels.push_back(i % 10);
  const auto fold = stratified_folds(labels, 10, 10, 3);
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (std::size_t i = 0; i < labels.size(); ++i) ++count[{labels[i], fold[i]}];
  CHECK(count.size() == 100);
  for (const auto& [key, c] : count) CHECK(c == 1);
  CHECK(stratified_folds(labels, 10, 10, 3) == fold);
  CHECK_THROWS_AS(stratified_folds(std::vector<std::size_t>{0, 0, 1}, 2, 3, 1), DataError);
  CHECK_THROWS_AS(stratified_folds(labels, 10, 1, 1), ConfigError);
}

TEST_CASE("split sizes follow the train fraction") {
  std::vector<std::size_t> labels(100);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3;
  const auto s = stratified_split(labels, 3, 0.66, 1);
  CHECK(std::abs(static_cast<int>(s.train.size()) - 66) <= 1);
  CHECK(std::abs(static_cast<int>(s.test.size()) - 34) <= 1);
  const auto half = stratified_split(std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2, 0.5, 9);
  CHECK(half.train.size() == 5);
  CHECK(half.test.size() == 5);
  CHECK_THROWS_AS(stratified_split(labels, 3, 1.0, 1), ConfigError);
}

TEST_CASE("cross-validation with a perfect feature scores 1") {
  const auto ds = blobs(20, 4, 4, 50.0, 1);
  const auto r = evaluate_cv(ds, tree_trainer(), 10, 1);
  CHECK(r.metrics.weighted_f == 1.0);
  std::size_t total = 0;
  for (const auto& row : r.confusion) {
    for (std::size_t v : row) total += v;
  }
  CHECK(total == ds.size());
}

TEST_CASE("majority trainer on a 60/40 split") {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < 60 ? "a" : "b");
  }
  const LabeledDataset ds({"f"}, rows, labels);
  Trainer majority = [](const LabeledDataset& d) -> std::unique_ptr<Classifier> {
    return std::make_unique<MajorityModel>(d);
  };
  const auto r = evaluate_cv(ds, majority, 10, 2);
  CHECK(r.metrics.per_class[0].recall == 1.0);
  CHECK(r.metrics.per_class[1].recall == 0.0);
  CHECK(r.metrics.per_class[1].precision == 0.0);
  const auto s = evaluate_split(ds, majority, 0.66, 2);
  CHECK(s.metrics.per_class[0].recall == 1.0);
  CHECK(s.metrics.per_class[1].recall == 0.0);
}

TEST_CASE("separable data is learned exactly") {
  const auto ds = blobs(30, 3, 3, 40.0, 5);
  CHECK(accuracy_on(*train_forest(ds), ds) == 1.0);
  CHECK(accuracy_on(*train_tree(ds), ds) == 1.0);
  CHECK(accuracy_on(*train_logistic(ds), ds) == 1.0);
}

TEST_CASE("forest predictions are deterministic and well formed") {
  const auto ds = blobs(25, 4, 5, 2.0, 6);
  const auto a = train_forest(ds);
  const auto b = train_forest(ds);
  CHECK(model_document(*a) == model_document(*b));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> probe(5);
    for (double& v : probe) v = g(rng);
    const auto pa = a->predict_row(probe);
    const auto pb = b->predict_row(probe);
    CHECK(pa.label == pb.label);
    CHECK(pa.confidence == pb.confidence);
    double sum = 0.0;
    for (double p : pa.distribution) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pa.confidence == *std::max_element(pa.distribution.begin(), pa.distribution.end()));
  }
}

TEST_CASE("pure regions get confident votes") {
  const auto ds = blobs(40, 2, 2, 30.0, 8);
  const auto f = train_forest(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(f->predict_row(ds.rows()[i]).confidence >= 0.95);
}

TEST_CASE("single-class training gives certainty") {
  const LabeledDataset ds({"a", "b"}, {{1, 2}, {3, 4}, {5, 6}}, {"only", "only", "only"});
  const auto f = train_forest(ds);
  const auto p = f->predict_row(std::vector<double>{100.0, -3.0});
  CHECK(p.label == "only");
  CHECK(p.confidence == 1.0);
}

TEST_CASE("rescaling leaf counts keeps the argmax") {
  const auto ds = blobs(20, 3, 4, 1.5, 9);
  const auto f = train_forest(ds);
  auto trees = f->trees();
  for (auto& t : trees) {
    for (auto& c : t.counts) {
      for (double& v : c) v *= 7.5;
    }
  }
  const ForestModel scaled(f->label_vocab(), f->feature_names(), f->config(), trees);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> probe(4);
    for (double& v : probe) v = g(rng);
    CHECK(scaled.predict_row(probe).label == f->predict_row(probe).label);
  }
}

TEST_CASE("tree matches an exhaustive stump search on tiny data") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nrows(2, 8), cls(0, 2), val(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = nrows(rng);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      rows.push_back({static_cast<double>(val(rng))});
      labels.push_back("c" + std::to_string(cls(rng)));
    }
    const LabeledDataset ds({"v"}, rows, labels);
    std::vector<std::pair<double, std::size_t>> pts;
    for (std::size_t i = 0; i < ds.size(); ++i) pts.emplace_back(rows[i][0], ds.label_indices()[i]);
    for (std::size_t depth : {1u, 2u}) {
      ForestConfig cfg;
      cfg.max_depth = depth;
      const auto tree = train_tree(ds, cfg);
      const auto oracle = oracle_grow(pts, ds.num_classes(), depth);
      for (double probe = -0.5; probe <= 6.5; probe += 0.25) {
        const std::vector<double> row{probe};
        const auto& t = tree->trees()[0];
        INFO("trial " << trial << " depth " << depth << " probe " << probe);
        CHECK(t.counts[t.leaf_for(row)] == oracle_leaf(*oracle, probe));
      }
    }
  }
}

TEST_CASE("logistic gradient matches finite differences") {
  const auto ds = blobs(10, 3, 4, 1.0, 12);
  const std::size_t classes = 3, width = 5;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> w(classes * width);
  for (double& v : w) v = g(rng);
  std::vector<double> grad;
  logistic_objective(w, ds.rows(), ds.label_indices(), classes, 0.1, &grad);
  REQUIRE(grad.size() == w.size());
  for (std::size_t idx : {0u, 3u, 4u, 7u, 13u}) {
    const double h = 1e-5;
    auto wp = w, wm = w;
    wp[idx] += h;
    wm[idx] -= h;
    const double fd = (logistic_objective(wp, ds.rows(), ds.label_indices(), classes, 0.1, nullptr) -
                       logistic_objective(wm, ds.rows(), ds.label_indices(), classes, 0.1, nullptr)) /
                      (2.0 * h);
    CHECK(std::abs(fd - grad[idx]) / std::max(std::abs(grad[idx]), 1e-8) < 1e-5);
  }
}

TEST_CASE("models survive a save and load") {
  auto dir = testutil::scratch_dir("model_io");
  const auto ds = blobs(15, 3, 3, 2.0, 14);
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto f = train_forest(ds, cfg);
  const auto lr = train_logistic(ds);
  save_model(*f, (dir / "f.json").string());
  save_model(*lr, (dir / "l.json").string());
  const auto f2 = load_model((dir / "f.json").string());
  const auto l2 = load_model((dir / "l.json").string());
  CHECK(f2->kind() == "forest");
  CHECK(l2->kind() == "logistic");
  for (const auto& row : ds.rows()) {
    CHECK(f2->distribution(row) == f->distribution(row));
    CHECK(l2->distribution(row) == lr->distribution(row));
  }
  nlohmann::json doc = model_document(*f);
  doc["version"] = 99;
  CHECK_THROWS_AS(model_from_document(doc), Error);
  CHECK_THROWS_AS(load_model((dir / "none.json").string()), IoError);
  CHECK_THROWS_AS(f->predict(FeatureVector({"x", "y", "z"}, {1, 2, 3})), InvariantError);
}

TEST_CASE("keyword threshold and filter") {
  std::vector<ScoredSegment> preds;
  for (int i = 0; i < 10; ++i) preds.push_back({static_cast<std::size_t>(i), "w", 0.1 * (i + 1)});
  CHECK(keyword_filter(preds, 0.0).size() == 10);
  CHECK(keyword_filter(preds, -3.0).size() == 10);
  CHECK(keyword_filter(preds, 1.0).size() == 1);
  CHECK(keyword_filter(preds, 7.0).size() == 1);
  CHECK(keyword_filter(preds, 0.55).size() == 5);

  const ConfidenceCdf cdf = keyword_confidence_cdf(preds);
  CHECK(cdf.cdf(0.35) == doctest::Approx(0.3));
  CHECK(cdf.quantile(0.0) == doctest::Approx(0.1));
  CHECK(cdf.quantile(2.0) == doctest::Approx(1.0));
  CHECK(cdf.mean() == doctest::Approx(0.55));
  CHECK_THROWS_AS(ConfidenceCdf(std::vector<double>{}), DataError);
  CHECK_THROWS_AS(pick_keyword_threshold(std::vector<ScoredSegment>{}), DataError);
}

TEST_CASE("unanimous forest votes survive a threshold of 1") {
  const auto ds = blobs(30, 2, 2, 40.0, 15);
  const auto f = train_forest(ds);
  std::vector<std::vector<double>> probes = ds.rows();
  probes.push_back({20.0, 20.0});  // between the clusters, votes split
  const auto scored = score_rows(*f, probes);
  const auto kept = keyword_filter(scored, 1.0);
  for (const auto& s : kept) CHECK(s.confidence == 1.0);
  CHECK(kept.size() >= ds.size() * 9 / 10);
}

TEST_CASE("keywords score above marginal words when the vocabularies separate") {
  // Keyword classes sit far apart; marginal words fall between them.
  const auto train = blobs(30, 3, 3, 25.0, 16);
  const auto f = train_forest(train);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> marginal;
  for (int i = 0; i < 60; ++i) marginal.push_back({12.0 + 4.0 * g(rng), 12.0 + 4.0 * g(rng), 12.0 + 4.0 * g(rng)});
  const auto kw = score_rows(*f, train.rows());
  const auto mg = score_rows(*f, marginal);
  CHECK(keyword_confidence_cdf(kw).mean() > keyword_confidence_cdf(mg).mean());
  const double theta = pick_keyword_threshold(mg, 0.95);
  CHECK(static_cast<double>(keyword_filter(kw, theta).size()) / static_cast<double>(kw.size()) >= 0.6);
}

TEST_CASE("one-vs-others relabelling") {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 580; ++i) {
    rows.push_back({static_cast<double>(i % 10), static_cast<double>(i)});
    labels.push_back("s" + std::to_string(i % 10));
  }
  const LabeledDataset ds({"a", "b"}, rows, labels);
  const auto bin = binary_one_vs_others(ds, "s3");
  REQUIRE(bin.label_vocab() == std::vector<std::string>{"other", "s3"});
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto r = evaluate_cv(bin, forest_trainer(cfg), 10, 1);
  CHECK(r.metrics.per_class[1].support == 58);
  CHECK(r.metrics.per_class[0].support == 522);
  CHECK_THROWS_AS(binary_one_vs_others(ds, "nobody"), ConfigError);
}

TEST_CASE("forest configuration is validated") {
  const auto ds = blobs(5, 2, 2, 5.0, 18);
  ForestConfig cfg;
  cfg.n_trees = 0;
  CHECK_THROWS_AS(train_forest(ds, cfg), ConfigError);
  cfg = ForestConfig{};
  cfg.features_per_split = 3;
  CHECK_THROWS_AS(train_forest(ds, cfg), ConfigError);
  CHECK(ForestConfig{}.resolved_features_per_split(59) == 6);
  CHECK(ForestConfig::from_json(ForestConfig{}.to_json()).to_json() == ForestConfig{}.to_json());
}
