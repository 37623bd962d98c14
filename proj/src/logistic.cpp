#include "vibespeech/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "vibespeech/error.hpp"

namespace vibespeech {

nlohmann::json LogisticConfig::to_json() const {
  return {{"l2", l2}, {"max_epochs", max_epochs}, {"grad_tol", grad_tol}};
}

LogisticConfig LogisticConfig::from_json(const nlohmann::json& j) {
  LogisticConfig c;
  c.l2 = j.value("l2", c.l2);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  return c;
}

namespace {

void softmax_scores(std::span<const double> weights, std::span<const double> x, std::size_t classes,
                    std::vector<double>& p) {
  const std::size_t stride = x.size() + 1;
  p.resize(classes);
  double top = -INFINITY;
  for (std::size_t c = 0; c < classes; ++c) {
    const double* w = weights.data() + c * stride;
    double z = w[x.size()];
    for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
    p[c] = z;
    top = std::max(top, z);
  }
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
}

}  // namespace

double logistic_objective(std::span<const double> weights, const std::vector<std::vector<double>>& x,
                          const std::vector<std::size_t>& y, std::size_t classes, double l2,
                          std::vector<double>* grad) {
  const std::size_t n = x.size();
  const std::size_t d = n ? x[0].size() : 0;
  const std::size_t stride = d + 1;
  if (weights.size() != classes * stride) throw InvariantError("logistic: weight size mismatch");
  if (grad) grad->assign(weights.size(), 0.0);
  double loss = 0.0;
  std::vector<double> p;
  for (std::size_t i = 0; i < n; ++i) {
    softmax_scores(weights, x[i], classes, p);
    loss -= std::log(std::max(p[y[i]], 1e-300));
    if (grad) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double r = p[c] - (c == y[i] ? 1.0 : 0.0);
        double* g = grad->data() + c * stride;
        for (std::size_t j = 0; j < d; ++j) g[j] += r * x[i][j];
        g[d] += r;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  if (grad) {
    for (double& g : *grad) g *= inv_n;
  }
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      const double w = weights[c * stride + j];
      loss += 0.5 * l2 * w * w;
      if (grad) (*grad)[c * stride + j] += l2 * w;
    }
  }
  return loss;
}

LogisticModel::LogisticModel(std::vector<std::string> label_vocab, std::vector<std::string> feature_names,
                             LogisticConfig config, std::vector<double> means, std::vector<double> scales,
                             std::vector<double> weights, std::size_t epochs)
    : Classifier(std::move(label_vocab), std::move(feature_names)),
      config_(config),
      means_(std::move(means)),
      scales_(std::move(scales)),
      weights_(std::move(weights)),
      epochs_(epochs) {
  const std::size_t d = this->feature_names().size();
  if (means_.size() != d || scales_.size() != d ||
      weights_.size() != this->label_vocab().size() * (d + 1)) {
    throw InvariantError("logistic model: parameter shapes inconsistent");
  }
}

std::vector<double> LogisticModel::distribution(std::span<const double> row) const {
  std::vector<double> z(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - means_[j]) / scales_[j];
  std::vector<double> p;
  softmax_scores(weights_, z, label_vocab().size(), p);
  return p;
}

nlohmann::json LogisticModel::to_json() const {
  return {{"config", config_.to_json()}, {"means", means_}, {"scales", scales_},
          {"weights", weights_},         {"epochs", epochs_}};
}

std::unique_ptr<LogisticModel> LogisticModel::from_json(const nlohmann::json& j) {
  return std::make_unique<LogisticModel>(
      j.at("label_vocab").get<std::vector<std::string>>(),
      j.at("feature_names").get<std::vector<std::string>>(), LogisticConfig::from_json(j.at("config")),
      j.at("means").get<std::vector<double>>(), j.at("scales").get<std::vector<double>>(),
      j.at("weights").get<std::vector<double>>(), j.at("epochs").get<std::size_t>());
}

std::unique_ptr<LogisticModel> train_logistic(const LabeledDataset& ds, const LogisticConfig& cfg) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.num_features();
  if (d == 0) throw ConfigError("logistic: dataset has no features");
  const std::size_t classes = ds.num_classes();

  std::vector<double> means(d, 0.0), scales(d, 0.0);
  for (const auto& r : ds.rows()) {
    for (std::size_t j = 0; j < d; ++j) means[j] += r[j];
  }
  for (double& m : means) m /= static_cast<double>(n);
  for (const auto& r : ds.rows()) {
    for (std::size_t j = 0; j < d; ++j) scales[j] += (r[j] - means[j]) * (r[j] - means[j]);
  }
  for (double& s : scales) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[i][j] = (ds.rows()[i][j] - means[j]) / scales[j];
  }
  const auto& y = ds.label_indices();

  std::vector<double> w(classes * (d + 1), 0.0);
  std::vector<double> grad, trial, trial_grad;
  double loss = logistic_objective(w, x, y, classes, cfg.l2, &grad);
  double step = 1.0;
  std::size_t epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    if (std::sqrt(gnorm2) < cfg.grad_tol) break;
    // Armijo backtracking along the negative gradient.
    while (true) {
      trial.resize(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - step * grad[i];
      double trial_loss = logistic_objective(trial, x, y, classes, cfg.l2, &trial_grad);
      if (trial_loss <= loss - 0.5 * step * gnorm2 || step < 1e-12) {
        w.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        break;
      }
      step *= 0.5;
    }
    step = std::min(step * 2.0, 64.0);
  }
  return std::make_unique<LogisticModel>(ds.label_vocab(), ds.feature_names(), cfg, std::move(means),
                                         std::move(scales), std::move(w), epoch);
}

Trainer logistic_trainer(LogisticConfig cfg) {
  return [cfg](const LabeledDataset& ds) -> std::unique_ptr<Classifier> { return train_logistic(ds, cfg); };
}

}  // namespace vibespeech
