#include "speech3d/adapters/wav.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "speech3d/errors.hpp"

namespace speech3d::adapters {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
}

std::uint32_t get_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

std::uint16_t get_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

struct DataChunk {
  std::size_t offset;
  std::size_t size;
};

DataChunk locate_data(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw BadAudio("not a RIFF/WAVE file");
  }
  bool have_format = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string_view id = b.substr(at, 4);
    const std::uint32_t size = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > b.size()) throw BadAudio("truncated fmt chunk");
      const auto format = get_u16(b, body);
      const auto channels = get_u16(b, body + 2);
      const auto rate = get_u32(b, body + 4);
      const auto bits = get_u16(b, body + 14);
      if (format != 1 || channels != 1 || rate != kSampleRate || bits != 16) {
        throw BadAudio("audio must be 16 kHz mono 16-bit PCM");
      }
      have_format = true;
    } else if (id == "data") {
      if (!have_format) throw BadAudio("data chunk before fmt chunk");
      const std::size_t available = b.size() - body;
      return {body, std::min<std::size_t>(size, available) & ~std::size_t{1}};
    }
    at = body + size + (size & 1);
  }
  throw BadAudio("missing data chunk");
}

}  // namespace

std::string encode_wav(const PcmClip& clip) {
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, clip.sample_rate);
  put_u32(out, clip.sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (auto s : clip.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

PcmClip decode_wav(std::string_view bytes) {
  const auto chunk = locate_data(bytes);
  PcmClip clip;
  clip.samples.resize(chunk.size / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<std::int16_t>(get_u16(bytes, chunk.offset + 2 * i));
  }
  return clip;
}

double wav_duration_seconds(std::string_view bytes) {
  const auto chunk = locate_data(bytes);
  return static_cast<double>(chunk.size / 2) / kSampleRate;
}

PcmClip sine_clip(double seconds, double frequency, double amplitude) {
  PcmClip clip;
  const auto n = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    clip.samples[i] = static_cast<std::int16_t>(
        std::lround(32767.0 * amplitude * std::sin(2.0 * std::numbers::pi * frequency * t)));
  }
  return clip;
}

PcmClip silence(double seconds) {
  PcmClip clip;
  clip.samples.assign(static_cast<std::size_t>(std::llround(seconds * kSampleRate)), 0);
  return clip;
}

}  // namespace speech3d::adapters
