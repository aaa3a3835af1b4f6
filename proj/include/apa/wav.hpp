#pragma once

#include <filesystem>
#include <vector>

namespace apa {

/// Decoded WAV contents, interleaved, scaled to [-1, 1].
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<float> interleaved;

  std::size_t frames() const {
    return channels > 0 ? interleaved.size() / static_cast<std::size_t>(channels) : 0;
  }
  /// Mean of the channels.
  std::vector<float> downmix() const;
};

enum class WavEncoding { Pcm16, Float32 };

/// Reads 16/24-bit PCM or 32-bit float WAV (plain or extensible header).
/// Any other encoding, or a malformed file, throws DataError.
WavData read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const std::vector<float>& mono, int sample_rate,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace apa
