#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace speech3d::adapters {

// Command audio is pinned to 16 kHz mono 16-bit PCM in a RIFF/WAVE container.
inline constexpr std::uint32_t kSampleRate = 16000;
inline constexpr double kMaxCommandSeconds = 15.0;

struct PcmClip {
  std::uint32_t sample_rate = kSampleRate;
  std::vector<std::int16_t> samples;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

std::string encode_wav(const PcmClip& clip);

// Throws BadAudio unless the bytes are 16 kHz mono 16-bit PCM WAV.
PcmClip decode_wav(std::string_view bytes);

// Reads only the header; same format checks as decode_wav.
double wav_duration_seconds(std::string_view bytes);

// 440 Hz tone of the given length.
PcmClip sine_clip(double seconds, double frequency = 440.0, double amplitude = 0.3);

// Zero-valued clip.
PcmClip silence(double seconds);

}  // namespace speech3d::adapters
