#include "vibespeech/model_io.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"
#include "vibespeech/forest.hpp"
#include "vibespeech/logistic.hpp"

namespace vibespeech {

Classifier::Classifier(std::vector<std::string> label_vocab, std::vector<std::string> feature_names)
    : vocab_(std::move(label_vocab)), feature_names_(std::move(feature_names)) {
  if (vocab_.empty()) throw InvariantError("classifier: empty label vocabulary");
  if (feature_names_.empty()) throw InvariantError("classifier: no features");
}

Prediction Classifier::predict_row(std::span<const double> row) const {
  if (row.size() != feature_names_.size()) {
    throw InvariantError("predict: row has " + std::to_string(row.size()) + " values, model expects " +
                         std::to_string(feature_names_.size()));
  }
  Prediction p;
  p.distribution = distribution(row);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.distribution.size(); ++c) {
    if (p.distribution[c] > p.distribution[best] ||
        (p.distribution[c] == p.distribution[best] && vocab_[c] < vocab_[best])) {
      best = c;
    }
  }
  p.label_index = best;
  p.label = vocab_[best];
  p.confidence = p.distribution[best];
  return p;
}

Prediction Classifier::predict(const FeatureVector& fv) const {
  if (fv.names() != feature_names_) throw InvariantError("predict: feature names do not match the model");
  return predict_row(fv.values());
}

nlohmann::json ForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    trees.push_back({{"feature", t.feature},
                     {"threshold", t.threshold},
                     {"left", t.left},
                     {"right", t.right},
                     {"counts", t.counts}});
  }
  return {{"config", config_.to_json()}, {"trees", trees}};
}

std::unique_ptr<ForestModel> ForestModel::from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    t.feature = jt.at("feature").get<std::vector<int>>();
    t.threshold = jt.at("threshold").get<std::vector<double>>();
    t.left = jt.at("left").get<std::vector<int>>();
    t.right = jt.at("right").get<std::vector<int>>();
    t.counts = jt.at("counts").get<std::vector<std::vector<double>>>();
    trees.push_back(std::move(t));
  }
  return std::make_unique<ForestModel>(j.at("label_vocab").get<std::vector<std::string>>(),
                                       j.at("feature_names").get<std::vector<std::string>>(),
                                       ForestConfig::from_json(j.at("config")), std::move(trees));
}

nlohmann::json model_document(const Classifier& model) {
  nlohmann::json doc = model.to_json();
  doc["schema"] = "vibespeech.model";
  doc["version"] = kModelSchemaVersion;
  doc["kind"] = model.kind();
  doc["label_vocab"] = model.label_vocab();
  doc["feature_names"] = model.feature_names();
  return doc;
}

std::unique_ptr<Classifier> model_from_document(const nlohmann::json& doc) {
  try {
    if (doc.value("schema", std::string()) != "vibespeech.model") throw ParseError("model: not a model document");
    if (doc.value("version", 0) != kModelSchemaVersion) {
      throw ParseError("model: unsupported schema version " + std::to_string(doc.value("version", 0)));
    }
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "forest") return ForestModel::from_json(doc);
    if (kind == "logistic") return LogisticModel::from_json(doc);
    throw ParseError("model: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: malformed document: ") + e.what());
  }
}

void save_model(const Classifier& model, const std::string& path) {
  write_text_file(path, model_document(model).dump(1) + "\n");
}

std::unique_ptr<Classifier> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model_from_document(doc);
}

}  // namespace vibespeech
