#include "vibespeech/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vibespeech/csv.hpp"
#include "vibespeech/error.hpp"

namespace vibespeech {

namespace {

double median_interval(std::span<const double> t) {
  std::vector<double> d(t.size() - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) d[i] = t[i + 1] - t[i];
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(d.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

SensorTrace::SensorTrace(double sample_rate_hz, std::vector<double> t, std::vector<double> x,
                         std::vector<double> y, std::vector<double> z, Meta meta)
    : sample_rate_hz_(sample_rate_hz),
      t_(std::move(t)),
      x_(std::move(x)),
      y_(std::move(y)),
      z_(std::move(z)),
      meta_(std::move(meta)) {
  if (!(std::isfinite(sample_rate_hz_) && sample_rate_hz_ > 0.0)) {
    throw InvariantError("sensor trace: sample rate must be positive and finite");
  }
  const std::size_t n = t_.size();
  if (n == 0) throw InvariantError("sensor trace: empty");
  if (x_.size() != n || y_.size() != n || z_.size() != n) {
    throw InvariantError("sensor trace: channel lengths differ from timestamp count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t_[i])) throw InvariantError("sensor trace: non-finite timestamp at row " + std::to_string(i));
    if (i > 0 && !(t_[i] > t_[i - 1])) {
      throw InvariantError("sensor trace: non-monotonic timestamps at row " + std::to_string(i));
    }
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]) || !std::isfinite(z_[i])) {
      throw InvariantError("sensor trace: non-finite acceleration at row " + std::to_string(i));
    }
  }
  if (n >= 2) {
    double nominal = 1.0 / sample_rate_hz_;
    double med = median_interval(t_);
    if (std::abs(med - nominal) > 0.2 * nominal) {
      std::ostringstream os;
      os << "sensor trace: median sample interval " << med << " s is not within 20% of 1/"
         << sample_rate_hz_ << " Hz";
      throw InvariantError(os.str());
    }
  }
}

std::span<const double> SensorTrace::axis(Axis a) const {
  switch (a) {
    case Axis::kX:
      return x_;
    case Axis::kY:
      return y_;
    case Axis::kZ:
      return z_;
  }
  return z_;
}

SensorTrace SensorTrace::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > size()) throw InvariantError("sensor trace: invalid slice bounds");
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(end));
  };
  return SensorTrace(sample_rate_hz_, cut(t_), cut(x_), cut(y_), cut(z_), meta_);
}

SensorTrace SensorTrace::with_channels(std::vector<double> x, std::vector<double> y,
                                       std::vector<double> z, Meta meta) const {
  return SensorTrace(sample_rate_hz_, t_, std::move(x), std::move(y), std::move(z),
                     std::move(meta));
}

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "csv") return TraceFormat::kCsv;
  if (name == "jsonl") return TraceFormat::kJsonl;
  throw ConfigError("unknown trace format '" + name + "' (expected csv or jsonl)");
}

namespace {

// "# key=value" -> (key, value); returns false for other comments.
bool parse_meta_comment(std::string_view line, std::string& key, std::string& value) {
  line.remove_prefix(1);
  line = trim(line);
  auto eq = line.find('=');
  if (eq == std::string_view::npos || eq == 0) return false;
  key = std::string(trim(line.substr(0, eq)));
  value = std::string(trim(line.substr(eq + 1)));
  return true;
}

}  // namespace

SensorTrace load_trace(const std::string& path, TraceFormat format,
                       std::optional<double> sample_rate_hz) {
  auto lines = read_lines(path);
  Meta meta;
  std::vector<double> t, x, y, z;
  bool header_seen = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string key, value;
      if (parse_meta_comment(line, key, value)) meta[key] = value;
      continue;
    }
    if (format == TraceFormat::kCsv) {
      auto fields = split_fields(line);
      if (!header_seen) {
        header_seen = true;
        if (fields.size() == 4 && trim(fields[0]) == "t" && trim(fields[1]) == "x" &&
            trim(fields[2]) == "y" && trim(fields[3]) == "z") {
          continue;
        }
        throw ParseError(where + ": expected header 't,x,y,z'");
      }
      if (fields.size() != 4) {
        throw ParseError(where + ": expected 4 fields, found " + std::to_string(fields.size()));
      }
      t.push_back(parse_double(fields[0], where));
      x.push_back(parse_double(fields[1], where));
      y.push_back(parse_double(fields[2], where));
      z.push_back(parse_double(fields[3], where));
    } else {
      nlohmann::json row;
      try {
        row = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": " + e.what());
      }
      auto get = [&](const char* key) {
        if (!row.is_object() || !row.contains(key) || !row[key].is_number()) {
          throw ParseError(where + ": missing numeric key '" + key + "'");
        }
        return row[key].get<double>();
      };
      t.push_back(get("t"));
      x.push_back(get("x"));
      y.push_back(get("y"));
      z.push_back(get("z"));
    }
  }
  if (t.empty()) throw ParseError(path + ": no samples");

  double rate = 0.0;
  if (sample_rate_hz) {
    rate = *sample_rate_hz;
  } else if (auto it = meta.find("sample_rate_hz"); it != meta.end()) {
    rate = parse_double(it->second, path + ": sample_rate_hz");
  } else if (t.size() >= 2) {
    double med = median_interval(t);
    if (!(med > 0.0)) throw InvariantError(path + ": non-monotonic timestamps");
    rate = 1.0 / med;
    meta["sample_rate_source"] = "inferred";
  } else {
    throw ConfigError(path + ": sample rate not given and cannot be inferred from one sample");
  }
  meta["sample_rate_hz"] = format_double(rate);
  meta["source"] = path;
  meta["format"] = format == TraceFormat::kCsv ? "csv" : "jsonl";
  try {
    return SensorTrace(rate, std::move(t), std::move(x), std::move(y), std::move(z),
                       std::move(meta));
  } catch (const InvariantError& e) {
    throw InvariantError(path + ": " + e.what());
  }
}

void save_trace(const SensorTrace& trace, const std::string& path, TraceFormat format) {
  std::string out;
  out.reserve(trace.size() * 64 + 256);
  Meta meta = trace.meta();
  meta["sample_rate_hz"] = format_double(trace.sample_rate_hz());
  for (const auto& [k, v] : meta) {
    if (k.find('\n') != std::string::npos || v.find('\n') != std::string::npos) continue;
    out += "# " + k + "=" + v + "\n";
  }
  auto t = trace.t(), x = trace.x(), y = trace.y(), z = trace.z();
  if (format == TraceFormat::kCsv) {
    out += "t,x,y,z\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
      out += format_double(t[i]) + "," + format_double(x[i]) + "," + format_double(y[i]) + "," +
             format_double(z[i]) + "\n";
    }
  } else {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      out += "{\"t\":" + format_double(t[i]) + ",\"x\":" + format_double(x[i]) +
             ",\"y\":" + format_double(y[i]) + ",\"z\":" + format_double(z[i]) + "}\n";
    }
  }
  write_text_file(path, out);
}

SensorTrace trim_protocol_edges(const SensorTrace& trace, double head_s, double tail_s) {
  if (head_s < 0.0 || tail_s < 0.0) throw InvariantError("trim: negative margin");
  if (!(trace.duration_s() > head_s + tail_s) && (head_s > 0.0 || tail_s > 0.0)) {
    std::ostringstream os;
    os << "trim: trace duration " << trace.duration_s() << " s too short for " << head_s
       << " s head + " << tail_s << " s tail";
    throw InvariantError(os.str());
  }
  auto t = trace.t();
  // Slack absorbs timestamp rounding from i * dt.
  const double eps = 1e-6 / trace.sample_rate_hz();
  const double lo = t.front() + head_s - eps;
  const double hi = t.back() - tail_s + eps;
  auto begin = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), lo) - t.begin());
  auto end = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), hi) - t.begin());
  if (begin >= end) throw InvariantError("trim: no samples remain");
  return trace.slice(begin, end);
}

}  // namespace vibespeech
