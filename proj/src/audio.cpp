#include "vibespeech/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "vibespeech/error.hpp"

namespace vibespeech {

AudioClip::AudioClip(double sample_rate_hz, std::vector<double> samples,
                     std::optional<std::string> label)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)), label_(std::move(label)) {
  if (!(std::isfinite(sample_rate_hz_) && sample_rate_hz_ >= 8000.0)) {
    throw InvariantError("audio clip: sample rate must be >= 8000 Hz");
  }
  if (samples_.empty()) throw InvariantError("audio clip: empty");
  for (double s : samples_) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw InvariantError("audio clip: samples must be finite and within [-1, 1]");
    }
  }
}

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip load_audio(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ParseError(path + ": not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t len = le32(hdr + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16 || body + 16 > bytes.size()) throw ParseError(path + ": truncated fmt chunk");
      std::uint16_t fmt_tag = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (fmt_tag != 1) throw ParseError(path + ": unsupported encoding (only PCM)");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (body + len > bytes.size()) throw ParseError(path + ": truncated data chunk");
      data = bytes.data() + body;
      data_len = len;
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw ParseError(path + ": missing fmt chunk");
  if (data == nullptr) throw ParseError(path + ": missing data chunk");
  if (channels != 1) throw ParseError(path + ": multi-channel unsupported (" + std::to_string(channels) + " channels)");
  if (bits != 8 && bits != 16) throw ParseError(path + ": unsupported bit depth " + std::to_string(bits));
  std::size_t bytes_per = bits / 8;
  if (data_len % bytes_per != 0) throw ParseError(path + ": truncated sample data");
  std::vector<double> samples(data_len / bytes_per);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bits == 16) {
      auto raw = static_cast<std::int16_t>(le16(data + 2 * i));
      samples[i] = raw / 32768.0;
    } else {
      samples[i] = (static_cast<int>(data[i]) - 128) / 128.0;
    }
  }
  if (samples.empty()) throw ParseError(path + ": no samples");
  try {
    return AudioClip(rate, std::move(samples), std::filesystem::path(path).stem().string());
  } catch (const InvariantError& e) {
    throw InvariantError(path + ": " + e.what());
  }
}

void save_audio(const AudioClip& clip, const std::string& path) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate_hz()));
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, rate);
  put32(out, rate * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, 2 * n);
  for (double s : clip.samples()) {
    long v = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    v = std::clamp(v, -32768L, 32767L);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace vibespeech
