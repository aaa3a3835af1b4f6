#include "apa/resample.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace apa {
namespace {

constexpr int kTableResolution = 512;  // entries per zero crossing
constexpr double kKaiserBeta = 8.6;
constexpr long kPhases = 1024;

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

/// One-sided kernel sinc(u) * kaiser(u / Z) sampled on u in [0, Z].
std::vector<float> build_table(int zero_crossings) {
  const int n = zero_crossings * kTableResolution;
  std::vector<float> table(static_cast<std::size_t>(n) + 2, 0.0f);
  const double norm = bessel_i0(kKaiserBeta);
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / kTableResolution;
    const double r = u / zero_crossings;
    const double w = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    const double s = i == 0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
    table[static_cast<std::size_t>(i)] = static_cast<float>(s * w);
  }
  return table;
}

const std::vector<float>& kernel_table(int zero_crossings) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<std::vector<float>>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[zero_crossings];
  if (!slot) slot = std::make_unique<std::vector<float>>(build_table(zero_crossings));
  return *slot;
}

}  // namespace

std::vector<float> resample_by_step(std::span<const float> x, double step, std::size_t out_len,
                                    int zero_crossings) {
  if (!(step > 0.0)) throw std::invalid_argument("resample_by_step: step must be positive");
  if (zero_crossings < 1) throw std::invalid_argument("resample_by_step: zero_crossings < 1");
  const std::vector<float>& table = kernel_table(zero_crossings);

  const double cutoff = std::min(1.0, 1.0 / step);
  const double scale = cutoff * kTableResolution;  // table index per input sample of distance
  const long table_last = static_cast<long>(zero_crossings) * kTableResolution;
  const long half = static_cast<long>(std::ceil(zero_crossings / cutoff));
  const long taps = 2 * half;

  auto kernel = [&](double d) {
    const double pos = std::fabs(d) * scale;
    const auto idx = static_cast<long>(pos);
    if (idx >= table_last) return 0.0;
    const double frac = pos - static_cast<double>(idx);
    const auto i = static_cast<std::size_t>(idx);
    return cutoff * (table[i] + frac * (table[i + 1] - table[i]));
  };

  // Polyphase bank: the fractional position of each output sample is
  // quantized to 1/kPhases of an input sample.
  std::vector<float> bank(static_cast<std::size_t>((kPhases + 1) * taps));
  for (long p = 0; p <= kPhases; ++p) {
    const double frac = static_cast<double>(p) / kPhases;
    for (long j = 0; j < taps; ++j) {
      bank[static_cast<std::size_t>(p * taps + j)] =
          static_cast<float>(kernel(frac + static_cast<double>(half - 1 - j)));
    }
  }

  const auto n_in = static_cast<long>(x.size());
  std::vector<float> padded(static_cast<std::size_t>(n_in + 2 * half + 2), 0.0f);
  std::copy(x.begin(), x.end(), padded.begin() + half);

  std::vector<float> y(out_len, 0.0f);
  for (std::size_t k = 0; k < out_len; ++k) {
    const double t = static_cast<double>(k) * step;
    const double fl = std::floor(t);
    const auto first = static_cast<long>(fl) + 1;  // index into padded: floor(t) - half + 1 + half
    if (first + taps > static_cast<long>(padded.size())) break;
    const long phase = std::lround((t - fl) * kPhases);
    const float* h = bank.data() + phase * taps;
    const float* s = padded.data() + first;
    // Independent partial sums let the compiler vectorize without reassociation.
    float acc[8] = {};
    long j = 0;
    for (; j + 8 <= taps; j += 8) {
      for (int l = 0; l < 8; ++l) acc[l] += h[j + l] * s[j + l];
    }
    for (; j < taps; ++j) acc[0] += h[j] * s[j];
    y[k] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  }
  return y;
}

std::vector<float> resample(std::span<const float> x, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw std::invalid_argument("resample: invalid rate");
  if (from_rate == to_rate) return {x.begin(), x.end()};
  const double step = static_cast<double>(from_rate) / to_rate;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * to_rate / from_rate));
  return resample_by_step(x, step, out_len);
}

}  // namespace apa
