#pragma once

#include "vibespeech/classifier.hpp"

namespace vibespeech {

struct LogisticConfig {
  double l2 = 1e-4;
  std::size_t max_epochs = 500;
  double grad_tol = 1e-6;

  nlohmann::json to_json() const;
  static LogisticConfig from_json(const nlohmann::json& j);
};

/// Mean softmax cross-entropy plus (l2/2)*||W||^2 over non-bias weights.
/// `weights` is classes x (d+1) row-major with the bias last in each row.
/// Writes the gradient when `grad` is non-null.
double logistic_objective(std::span<const double> weights,
                          const std::vector<std::vector<double>>& x,
                          const std::vector<std::size_t>& y, std::size_t classes, double l2,
                          std::vector<double>* grad);

/// Multinomial softmax regression on standardised features.
class LogisticModel final : public Classifier {
 public:
  LogisticModel(std::vector<std::string> label_vocab, std::vector<std::string> feature_names,
                LogisticConfig config, std::vector<double> means, std::vector<double> scales,
                std::vector<double> weights, std::size_t epochs);

  std::vector<double> distribution(std::span<const double> row) const override;
  nlohmann::json to_json() const override;
  std::string kind() const override { return "logistic"; }
  std::size_t epochs() const { return epochs_; }

  static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& j);

 private:
  LogisticConfig config_;
  std::vector<double> means_;
  std::vector<double> scales_;
  std::vector<double> weights_;
  std::size_t epochs_;
};

/// Full-batch gradient descent with backtracking line search.
std::unique_ptr<LogisticModel> train_logistic(const LabeledDataset& ds, const LogisticConfig& cfg = {});

Trainer logistic_trainer(LogisticConfig cfg = {});

}  // namespace vibespeech
