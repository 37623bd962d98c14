#include "vibespeech/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"

namespace vibespeech {

Metrics metrics_from_confusion(const Confusion& confusion) {
  const std::size_t k = confusion.size();
  for (const auto& row : confusion) {
    if (row.size() != k) throw InvariantError("metrics: confusion matrix is not square");
  }
  Metrics m;
  m.per_class.resize(k);
  std::size_t total = 0, correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = confusion[c][c];
    std::size_t row_sum = std::accumulate(confusion[c].begin(), confusion[c].end(), std::size_t{0});
    std::size_t col_sum = 0;
    for (std::size_t r = 0; r < k; ++r) col_sum += confusion[r][c];
    auto& pc = m.per_class[c];
    pc.support = row_sum;
    pc.precision = col_sum == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col_sum);
    pc.recall = row_sum == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row_sum);
    const double pr = pc.precision + pc.recall;
    pc.f_measure = pr == 0.0 ? 0.0 : 2.0 * pc.precision * pc.recall / pr;
    total += row_sum;
    correct += tp;
  }
  if (k > 0) {
    double macro = 0.0;
    for (const auto& pc : m.per_class) macro += pc.f_measure;
    m.macro_f = macro / static_cast<double>(k);
  }
  if (total > 0) {
    for (const auto& pc : m.per_class) {
      const double w = static_cast<double>(pc.support) / static_cast<double>(total);
      m.weighted_precision += w * pc.precision;
      m.weighted_recall += w * pc.recall;
      m.weighted_f += w * pc.f_measure;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  }
  return m;
}

std::string to_string(Protocol p) { return p == Protocol::kCv10 ? "cv10" : "split66"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "cv10") return Protocol::kCv10;
  if (s == "split66") return Protocol::kSplit66;
  throw ConfigError("unknown protocol '" + s + "' (expected cv10 or split66)");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < label_vocab.size(); ++c) {
    const auto& pc = metrics.per_class[c];
    per_class.push_back({{"label", label_vocab[c]},
                         {"precision", pc.precision},
                         {"recall", pc.recall},
                         {"f_measure", pc.f_measure},
                         {"support", pc.support}});
  }
  nlohmann::json j{{"protocol", to_string(protocol)},
                   {"seed", seed},
                   {"assignment_hash", assignment_hash},
                   {"label_vocab", label_vocab},
                   {"confusion", confusion},
                   {"per_class", per_class},
                   {"weighted_precision", metrics.weighted_precision},
                   {"weighted_recall", metrics.weighted_recall},
                   {"weighted_f", metrics.weighted_f},
                   {"macro_f", metrics.macro_f},
                   {"accuracy", metrics.accuracy}};
  if (protocol == Protocol::kCv10) {
    j["folds"] = folds;
  } else {
    j["train_fraction"] = train_fraction;
  }
  return j;
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_by_class(const std::vector<std::size_t>& labels,
                                                        std::size_t classes, std::uint64_t seed) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i : order) by_class.at(labels[i]).push_back(i);
  return by_class;
}

std::string hash_assignment(const std::vector<std::size_t>& assignment) {
  std::string bytes;
  for (std::size_t a : assignment) bytes += std::to_string(a) + ",";
  return hex64(fnv1a64(bytes));
}

}  // namespace

std::vector<std::size_t> stratified_folds(const std::vector<std::size_t>& labels, std::size_t classes,
                                          std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation: k must be >= 2");
  auto by_class = shuffled_by_class(labels, classes, seed);
  std::ostringstream short_classes;
  bool too_small = false;
  for (std::size_t c = 0; c < classes; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k) {
      too_small = true;
      short_classes << " class " << c << " has " << by_class[c].size();
    }
  }
  if (too_small) {
    throw DataError("cross-validation: every class needs >= " + std::to_string(k) +
                    " rows;" + short_classes.str());
  }
  std::vector<std::size_t> fold(labels.size());
  std::size_t deal = 0;
  for (const auto& members : by_class) {
    for (std::size_t i : members) fold[i] = deal++ % k;
  }
  return fold;
}

TrainTestSplit stratified_split(const std::vector<std::size_t>& labels, std::size_t classes,
                                double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train fraction must be in (0, 1)");
  }
  auto by_class = shuffled_by_class(labels, classes, seed);
  std::vector<std::size_t> take(classes, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = train_fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(labels.size())));
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < remainders.size() && assigned < target; ++i) {
    const std::size_t c = remainders[i].second;
    if (remainders[i].first > 0.0 && take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }
  TrainTestSplit out;
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) continue;
    if (take[c] == 0 || take[c] == by_class[c].size()) {
      throw DataError("split: class " + std::to_string(c) + " with " + std::to_string(by_class[c].size()) +
                      " rows would be absent from the " + (take[c] == 0 ? "training" : "test") + " side");
    }
    out.train.insert(out.train.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
    out.test.insert(out.test.end(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]), by_class[c].end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

namespace {

// Maps the model's vocabulary (a subset when a fold lacks a class) onto the dataset's.
void accumulate(const LabeledDataset& ds, const Classifier& model, const std::vector<std::size_t>& test,
                Confusion& confusion) {
  const auto& vocab = ds.label_vocab();
  for (std::size_t i : test) {
    const auto pred = model.predict_row(ds.rows()[i]);
    const auto it = std::lower_bound(vocab.begin(), vocab.end(), pred.label);
    if (it == vocab.end() || *it != pred.label) throw Error("evaluate: model predicted unknown label " + pred.label);
    ++confusion[ds.label_indices()[i]][static_cast<std::size_t>(it - vocab.begin())];
  }
}

}  // namespace

EvalReport evaluate_cv(const LabeledDataset& ds, const Trainer& trainer, std::size_t k, std::uint64_t seed) {
  auto fold = stratified_folds(ds.label_indices(), ds.num_classes(), k, seed);
  const std::size_t classes = ds.num_classes();
  EvalReport report;
  report.label_vocab = ds.label_vocab();
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  report.protocol = Protocol::kCv10;
  report.folds = k;
  report.seed = seed;
  report.assignment_hash = hash_assignment(fold);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < ds.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    auto model = trainer(ds.subset(train));
    accumulate(ds, *model, test, report.confusion);
  }
  report.metrics = metrics_from_confusion(report.confusion);
  return report;
}

EvalReport evaluate_split(const LabeledDataset& ds, const Trainer& trainer, double train_fraction,
                          std::uint64_t seed) {
  auto split = stratified_split(ds.label_indices(), ds.num_classes(), train_fraction, seed);
  const std::size_t classes = ds.num_classes();
  EvalReport report;
  report.label_vocab = ds.label_vocab();
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  report.protocol = Protocol::kSplit66;
  report.train_fraction = train_fraction;
  report.seed = seed;
  std::vector<std::size_t> side(ds.size(), 1);
  for (std::size_t i : split.train) side[i] = 0;
  report.assignment_hash = hash_assignment(side);
  auto model = trainer(ds.subset(split.train));
  accumulate(ds, *model, split.test, report.confusion);
  report.metrics = metrics_from_confusion(report.confusion);
  return report;
}

LabeledDataset binary_one_vs_others(const LabeledDataset& ds, const std::string& target) {
  const auto& vocab = ds.label_vocab();
  if (!std::binary_search(vocab.begin(), vocab.end(), target)) {
    throw ConfigError("one-vs-others: unknown target label '" + target + "'");
  }
  if (target == kOtherLabel) throw ConfigError("one-vs-others: target collides with '" + kOtherLabel + "'");
  std::vector<std::string> labels;
  labels.reserve(ds.size());
  for (const auto& l : ds.labels()) labels.push_back(l == target ? target : kOtherLabel);
  return ds.with_labels(std::move(labels));
}

}  // namespace vibespeech
