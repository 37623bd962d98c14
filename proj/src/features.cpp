#include "vibespeech/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vibespeech/error.hpp"
#include "vibespeech/fft.hpp"

namespace vibespeech {

FeatureVector::FeatureVector(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.size() != values_.size()) {
    throw InvariantError("feature vector: " + std::to_string(names_.size()) + " names vs " +
                         std::to_string(values_.size()) + " values");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InvariantError("feature vector: non-finite " + names_[i]);
  }
}

double FeatureVector::at(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InvariantError("feature vector: no feature '" + name + "'");
  return values_[static_cast<std::size_t>(it - names_.begin())];
}

const std::vector<std::string>& tf_axis_stat_names() {
  static const std::vector<std::string> names = {
      "min",  "max", "median", "var", "std", "range",    "abs_mean", "cv",      "skew",      "kurt",
      "q1",   "q2",  "q3",     "iqr", "mcr", "abs_area", "energy",   "entropy", "freq_ratio"};
  return names;
}

const std::vector<std::string>& tf_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const char* axis : {"x", "y", "z"}) {
      for (const auto& stat : tf_axis_stat_names()) out.push_back(std::string(axis) + "_" + stat);
    }
    out.push_back("total_abs_area");
    out.push_back("total_strength");
    return out;
  }();
  return names;
}

namespace {

// Linear interpolation between order statistics: position (m-1)p.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> axis_statistics(std::span<const double> s, double dt) {
  const std::size_t m = s.size();
  if (m < 4) throw InvariantError("features: segment shorter than 4 samples");
  std::vector<double> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  const double mn = sorted.front();
  const double mx = sorted.back();
  const bool constant = mn == mx;
  const auto md = static_cast<double>(m);

  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / md;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_sum = 0.0;
  for (double v : s) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    abs_sum += std::abs(v);
  }
  m2 /= md;
  m3 /= md;
  m4 /= md;

  double var = 0.0, sd = 0.0, cv = 0.0, skew = 0.0, kurt = 0.0, mcr = 0.0;
  double energy = 0.0, entropy = 0.0, freq_ratio = 0.0;
  if (!constant) {
    var = m2 * md / (md - 1.0);
    sd = std::sqrt(var);
    cv = std::abs(mean) < 1e-9 ? 0.0 : 100.0 * sd / std::abs(mean);
    skew = m3 / std::pow(m2, 1.5);
    kurt = m4 / (m2 * m2);
    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if ((s[i] - mean) * (s[i + 1] - mean) < 0.0) ++crossings;
    }
    mcr = static_cast<double>(crossings) / (md - 1.0);

    // Bins 1..floor(m/2); removing the mean first only touches bin 0.
    std::vector<double> centered(m);
    for (std::size_t i = 0; i < m; ++i) centered[i] = s[i] - mean;
    auto mag = magnitude_spectrum(centered);
    double power = 0.0, peak = 0.0;
    for (std::size_t k = 1; k < mag.size(); ++k) {
      energy += mag[k];
      power += mag[k] * mag[k];
      peak = std::max(peak, mag[k]);
    }
    if (power > 0.0) {
      for (std::size_t k = 1; k < mag.size(); ++k) {
        const double p = mag[k] * mag[k] / power;
        if (p > 0.0) entropy -= p * std::log(p);
      }
      freq_ratio = peak / energy;
    }
  }

  const double q1 = quantile_sorted(sorted, 0.25);
  const double q2 = quantile_sorted(sorted, 0.5);
  const double q3 = quantile_sorted(sorted, 0.75);
  return {mn,   mx,   q2, var, sd,      mx - mn,       abs_sum / md, cv,         skew, kurt,
          q1,   q2,   q3, q3 - q1, mcr, abs_sum * dt, energy,       entropy,    freq_ratio};
}

FeatureVector extract_tf_features(const SensorTrace& trace, const SpeechSegment& seg) {
  seg.validate(trace.size());
  if (seg.length() < 4) throw InvariantError("features: segment shorter than 4 samples");
  const double dt = 1.0 / trace.sample_rate_hz();
  std::vector<double> values;
  values.reserve(kTfFeatureCount);
  double total_abs_area = 0.0;
  const std::size_t abs_area_idx = 15;
  for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
    auto stats = axis_statistics(trace.axis(a).subspan(seg.start_idx, seg.length()), dt);
    total_abs_area += stats[abs_area_idx];
    values.insert(values.end(), stats.begin(), stats.end());
  }
  auto x = trace.x(), y = trace.y(), z = trace.z();
  double strength = 0.0;
  for (std::size_t i = seg.start_idx; i < seg.end_idx; ++i) {
    strength += std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  }
  values.push_back(total_abs_area);
  values.push_back(strength / static_cast<double>(seg.length()));
  return FeatureVector(tf_feature_names(), std::move(values));
}

}  // namespace vibespeech
