#pragma once

#include <memory>
#include <string>

#include "vibespeech/classifier.hpp"

namespace vibespeech {

inline constexpr int kModelSchemaVersion = 1;

/// Model document: {"schema": "vibespeech.model", "version", "kind",
/// "label_vocab", "feature_names", ...kind-specific fields}.
nlohmann::json model_document(const Classifier& model);
std::unique_ptr<Classifier> model_from_document(const nlohmann::json& doc);

void save_model(const Classifier& model, const std::string& path);
std::unique_ptr<Classifier> load_model(const std::string& path);

}  // namespace vibespeech
