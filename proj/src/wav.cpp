#include "apa/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "apa/error.hpp"

namespace apa {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put32(std::ostream& out, uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

}  // namespace

std::vector<float> WavData::downmix() const {
  const std::size_t n = frames();
  std::vector<float> mono(n);
  if (channels == 1) {
    std::copy(interleaved.begin(), interleaved.begin() + static_cast<std::ptrdiff_t>(n),
              mono.begin());
    return mono;
  }
  for (std::size_t f = 0; f < n; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += interleaved[f * channels + c];
    mono[f] = static_cast<float>(acc / channels);
  }
  return mono;
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " (" + path.string() + ")";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file" + where);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const uint32_t size = u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw DataError("truncated fmt chunk" + where);
      const unsigned char* f = bytes.data() + body;
      format = u16(f);
      channels = u16(f + 2);
      rate = u32(f + 4);
      bits = u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw DataError("truncated extensible fmt chunk" + where);
        format = u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || data == nullptr) throw DataError("missing fmt or data chunk" + where);
  if (channels == 0 || rate == 0) throw DataError("invalid channel count or rate" + where);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool pcm24 = format == kFormatPcm && bits == 24;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !pcm24 && !f32) {
    throw DataError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits)" + where);
  }

  const std::size_t width = bits / 8;
  const std::size_t count = data_size / width / channels * channels;
  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels = channels;
  out.interleaved.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = data + i * width;
    if (pcm16) {
      out.interleaved[i] = static_cast<float>(static_cast<int16_t>(u16(p))) / 32768.0f;
    } else if (pcm24) {
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      out.interleaved[i] = static_cast<float>(v) / 8388608.0f;
    } else {
      float v;
      std::memcpy(&v, p, 4);
      out.interleaved[i] = v;
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<float>& mono, int sample_rate,
               WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write audio file: " + path.string());
  const bool f32 = encoding == WavEncoding::Float32;
  const uint16_t bits = f32 ? 32 : 16;
  const uint32_t data_bytes = static_cast<uint32_t>(mono.size() * (bits / 8));

  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put32(out, 16);
  put16(out, f32 ? kFormatFloat : kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<uint32_t>(sample_rate));
  put32(out, static_cast<uint32_t>(sample_rate) * (bits / 8));
  put16(out, bits / 8);
  put16(out, bits);
  out.write("data", 4);
  put32(out, data_bytes);
  for (float v : mono) {
    if (f32) {
      uint32_t w;
      std::memcpy(&w, &v, 4);
      put32(out, w);
    } else {
      const float c = std::clamp(v, -1.0f, 1.0f);
      put16(out, static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32767.0f))));
    }
  }
  if (!out) throw DataError("failed writing audio file: " + path.string());
}

}  // namespace apa
