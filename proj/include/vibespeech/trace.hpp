#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vibespeech {

using Meta = std::map<std::string, std::string>;

enum class Axis { kX = 0, kY = 1, kZ = 2 };

/// Timestamped tri-axial accelerometer samples (m/s^2) at a nominal rate.
///
/// Immutable once built. The constructor enforces every invariant:
/// equal lengths n >= 1, strictly increasing timestamps, median interval
/// within +/-20% of 1/sample_rate_hz, finite accelerations. Violations throw
/// InvariantError, so no partially valid trace can exist.
class SensorTrace {
 public:
  SensorTrace(double sample_rate_hz, std::vector<double> t, std::vector<double> x,
              std::vector<double> y, std::vector<double> z, Meta meta = {});

  double sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t size() const { return t_.size(); }
  double duration_s() const { return t_.back() - t_.front(); }

  std::span<const double> t() const { return t_; }
  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::span<const double> z() const { return z_; }
  std::span<const double> axis(Axis a) const;
  const Meta& meta() const { return meta_; }

  /// Copy of samples [begin, end) with the same rate and meta.
  SensorTrace slice(std::size_t begin, std::size_t end) const;

  /// Copy with replaced acceleration channels (same timestamps and rate).
  SensorTrace with_channels(std::vector<double> x, std::vector<double> y, std::vector<double> z,
                            Meta meta) const;

  friend bool operator==(const SensorTrace&, const SensorTrace&) = default;

 private:
  double sample_rate_hz_;
  std::vector<double> t_, x_, y_, z_;
  Meta meta_;
};

enum class TraceFormat { kCsv, kJsonl };

TraceFormat parse_trace_format(const std::string& name);

/// Loads a trace. The sample rate comes from `sample_rate_hz` when given,
/// else from a `# sample_rate_hz=<v>` header comment, else from the median
/// timestamp interval. Other `# key=value` comments are kept as meta.
SensorTrace load_trace(const std::string& path, TraceFormat format,
                       std::optional<double> sample_rate_hz = std::nullopt);

void save_trace(const SensorTrace& trace, const std::string& path, TraceFormat format);

/// Drops the recording-protocol margins: keeps samples with
/// t0 + head_s <= t <= t_end - tail_s.
SensorTrace trim_protocol_edges(const SensorTrace& trace, double head_s = 5.0,
                                double tail_s = 2.0);

}  // namespace vibespeech
