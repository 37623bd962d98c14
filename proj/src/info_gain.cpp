#include <algorithm>
#include <cmath>
#include <numeric>

#include "vibespeech/dataset.hpp"
#include "vibespeech/error.hpp"

namespace vibespeech {

namespace {

double entropy_nats(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

std::vector<std::pair<std::string, double>> rank_features_info_gain(const LabeledDataset& ds,
                                                                    std::size_t bins) {
  if (bins == 0) throw ConfigError("info gain: bins must be positive");
  const std::size_t n = ds.size();
  const std::size_t classes = ds.num_classes();
  const auto& y = ds.label_indices();

  std::vector<std::size_t> class_counts(classes, 0);
  for (std::size_t c : y) ++class_counts[c];
  const double h_y = entropy_nats(class_counts, n);

  std::vector<std::pair<std::string, double>> out;
  out.reserve(ds.num_features());
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> bin_of(n);
  for (std::size_t f = 0; f < ds.num_features(); ++f) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ds.rows()[a][f] < ds.rows()[b][f];
    });
    // Equal-frequency cut by rank; tied values share the bin of their first occurrence.
    std::size_t bin_count = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = order[r];
      if (r > 0 && ds.rows()[i][f] == ds.rows()[order[r - 1]][f]) {
        bin_of[i] = bin_of[order[r - 1]];
      } else {
        bin_of[i] = r * bins / n;
      }
      bin_count = std::max(bin_count, bin_of[i] + 1);
    }
    std::vector<std::vector<std::size_t>> joint(bin_count, std::vector<std::size_t>(classes, 0));
    std::vector<std::size_t> bin_totals(bin_count, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++joint[bin_of[i]][y[i]];
      ++bin_totals[bin_of[i]];
    }
    double h_cond = 0.0;
    for (std::size_t b = 0; b < bin_count; ++b) {
      if (bin_totals[b] == 0) continue;
      h_cond += static_cast<double>(bin_totals[b]) / static_cast<double>(n) *
                entropy_nats(joint[b], bin_totals[b]);
    }
    out.emplace_back(ds.feature_names()[f], std::max(0.0, h_y - h_cond));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace vibespeech
