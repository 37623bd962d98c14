#pragma once

// Small helpers and brute-force reference implementations shared by the tests.
// The references are written from the textbook definitions and share no code
// with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vibespeech/trace.hpp"

namespace testutil {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vibespeech_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline vibespeech::SensorTrace make_trace(double rate, const std::vector<double>& x, const std::vector<double>& y,
                                          const std::vector<double>& z) {
  std::vector<double> t(z.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) / rate;
  return vibespeech::SensorTrace(rate, t, x, y, z);
}

inline vibespeech::SensorTrace make_z_trace(double rate, const std::vector<double>& z) {
  return make_trace(rate, std::vector<double>(z.size(), 0.0), std::vector<double>(z.size(), 0.0), z);
}

inline std::vector<double> gaussian(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline bool close_rel(double a, double b, double tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= tol * scale;
}

// O(m^2) DFT magnitudes for k = 0..m/2.
inline std::vector<double> naive_dft_magnitude(const std::vector<double>& s) {
  const std::size_t m = s.size();
  std::vector<double> out(m / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * i) % m) / static_cast<double>(m);
      acc += s[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = std::abs(acc);
  }
  return out;
}

// Direct evaluation of the per-axis statistics in canonical order:
// min max median var std range abs_mean cv skew kurt q1 q2 q3 iqr mcr
// abs_area energy entropy freq_ratio.
inline std::vector<double> reference_axis_stats(const std::vector<double>& s, double dt) {
  const std::size_t m = s.size();
  const double n = static_cast<double>(m);
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  auto q = [&](double p) {
    const double h = (n - 1.0) * p;
    const double lo = std::floor(h);
    const auto i = static_cast<std::size_t>(lo);
    if (i + 1 >= m) return sorted[m - 1];
    return sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i]);
  };
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= n;
  double ss = 0.0, s3 = 0.0, s4 = 0.0, sabs = 0.0;
  for (double v : s) {
    ss += (v - mean) * (v - mean);
    s3 += std::pow(v - mean, 3);
    s4 += std::pow(v - mean, 4);
    sabs += std::abs(v);
  }
  const double var = ss / (n - 1.0);
  const double sd = std::sqrt(var);
  const double pop_var = ss / n;
  const bool flat = pop_var == 0.0;
  const double skew = flat ? 0.0 : (s3 / n) / std::pow(pop_var, 1.5);
  const double kurt = flat ? 0.0 : (s4 / n) / (pop_var * pop_var);
  const double cv = std::abs(mean) < 1e-9 ? 0.0 : 100.0 * sd / std::abs(mean);
  double crossings = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    if ((s[i - 1] < mean && s[i] > mean) || (s[i - 1] > mean && s[i] < mean)) crossings += 1.0;
  }
  const auto mag = naive_dft_magnitude(s);
  double energy = 0.0, power = 0.0, peak = 0.0;
  for (std::size_t k = 1; k < mag.size(); ++k) {
    energy += mag[k];
    power += mag[k] * mag[k];
    peak = std::max(peak, mag[k]);
  }
  double entropy = 0.0;
  if (power > 0.0) {
    for (std::size_t k = 1; k < mag.size(); ++k) {
      const double p = mag[k] * mag[k] / power;
      if (p > 0.0) entropy -= p * std::log(p);
    }
  }
  const double freq_ratio = energy > 0.0 ? peak / energy : 0.0;
  return {sorted.front(), sorted.back(), q(0.5), var, sd, sorted.back() - sorted.front(), sabs / n, cv, skew, kurt,
          q(0.25), q(0.5), q(0.75), q(0.75) - q(0.25), crossings / (n - 1.0), sabs * dt, energy, entropy,
          freq_ratio};
}

inline std::vector<double> reference_tf_features(const std::vector<double>& x, const std::vector<double>& y,
                                                 const std::vector<double>& z, double dt) {
  std::vector<double> out;
  double total_area = 0.0;
  for (const auto* axis : {&x, &y, &z}) {
    auto st = reference_axis_stats(*axis, dt);
    total_area += st[15];
    out.insert(out.end(), st.begin(), st.end());
  }
  double strength = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) strength += std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  out.push_back(total_area);
  out.push_back(strength / static_cast<double>(z.size()));
  return out;
}

// Indices into the 19 per-axis statistics that pass through a transform.
inline bool is_transform_stat(std::size_t idx) { return idx == 16 || idx == 17 || idx == 18; }

}  // namespace testutil
