#include "apa/embedding.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "apa/error.hpp"

namespace apa {
namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct MelFilter {
  int first_bin = 0;
  std::vector<double> weights;
};

std::vector<MelFilter> build_mel_filters() {
  constexpr int bands = LogMelEmbedder::kBands;
  constexpr int bins = LogMelEmbedder::kFftSize / 2 + 1;
  const double lo = hz_to_mel(LogMelEmbedder::kMinHz);
  const double hi = hz_to_mel(LogMelEmbedder::kMaxHz);

  std::vector<double> edges(bands + 2);
  for (int i = 0; i < bands + 2; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (bands + 1));
  }

  std::vector<MelFilter> filters(bands);
  for (int b = 0; b < bands; ++b) {
    const double left = edges[static_cast<std::size_t>(b)];
    const double center = edges[static_cast<std::size_t>(b) + 1];
    const double right = edges[static_cast<std::size_t>(b) + 2];
    MelFilter& f = filters[static_cast<std::size_t>(b)];
    f.first_bin = -1;
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * LogMelEmbedder::kSampleRate /
                        LogMelEmbedder::kFftSize;
      double w = 0.0;
      if (hz > left && hz < right) {
        w = hz <= center ? (hz - left) / (center - left) : (right - hz) / (right - center);
      }
      if (w > 0.0) {
        if (f.first_bin < 0) f.first_bin = k;
        f.weights.resize(static_cast<std::size_t>(k - f.first_bin + 1), 0.0);
        f.weights.back() = w;
      }
    }
    if (f.first_bin < 0) f.first_bin = 0;
  }
  return filters;
}

}  // namespace

EmbeddingMatrix EmbeddingMatrix::from_double(const Eigen::MatrixXd& m, std::string backend_id) {
  return EmbeddingMatrix{m.cast<float>(), std::move(backend_id)};
}

void validate(const EmbeddingMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DataError("embedding matrix is empty");
  if (!m.data.allFinite()) throw DataError("embedding matrix contains non-finite values");
}

std::optional<EmbedderSpec> known_backend(std::string_view id) {
  struct Entry {
    std::string_view id;
    std::size_t dim;
  };
  static constexpr Entry kTable[] = {
      {"builtin-logmel", 192}, {"vggish", 128}, {"openl3", 6144},
      {"clap0", 512},          {"clap1", 512},  {"clap2", 128},
  };
  for (const auto& e : kTable) {
    if (e.id == id) return EmbedderSpec{std::string(e.id), e.dim, 5.0, kPipelineSampleRate};
  }
  return std::nullopt;
}

Eigen::VectorXd Embedder::embed(const AudioWindow& window) const {
  const EmbedderSpec& s = spec();
  if (window.sample_rate != s.sample_rate) {
    throw DataError("embed: window sample rate " + std::to_string(window.sample_rate) +
                    " does not match embedder rate " + std::to_string(s.sample_rate));
  }
  if (!all_finite(window.samples)) throw DataError("embed: window contains non-finite samples");
  Eigen::VectorXd v = compute(window.samples);
  if (static_cast<std::size_t>(v.size()) != s.dim) {
    throw DataError("embed: backend produced " + std::to_string(v.size()) + " values, expected " +
                    std::to_string(s.dim));
  }
  return v;
}

struct LogMelEmbedder::Impl {
  std::vector<MelFilter> filters = build_mel_filters();
  std::vector<double> window;
  fftw_plan plan = nullptr;

  Impl() {
    window.resize(kFrameLength);
    for (int i = 0; i < kFrameLength; ++i) {
      window[static_cast<std::size_t>(i)] =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kFrameLength);
    }
    std::lock_guard lock(fftw_planner_mutex());
    double* in = fftw_alloc_real(kFftSize);
    fftw_complex* out = fftw_alloc_complex(kFftSize / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(kFftSize, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;
};

LogMelEmbedder::LogMelEmbedder()
    : spec_{"builtin-logmel", 3 * kBands, 5.0, kSampleRate}, impl_(std::make_unique<Impl>()) {}

LogMelEmbedder::~LogMelEmbedder() = default;

Eigen::MatrixXd LogMelEmbedder::logmel_frames(std::span<const float> samples) const {
  const auto n = static_cast<long>(samples.size());
  const long frames = n <= kFrameLength ? 1 : 1 + (n - kFrameLength) / kHop;
  Eigen::MatrixXd out(frames, kBands);

  // Plans are shared; execution on separate aligned buffers is thread-safe.
  double* in = fftw_alloc_real(kFftSize);
  fftw_complex* spec = fftw_alloc_complex(kFftSize / 2 + 1);
  std::vector<double> power(kFftSize / 2 + 1);

  for (long f = 0; f < frames; ++f) {
    const long start = f * kHop;
    for (int i = 0; i < kFftSize; ++i) {
      const long idx = start + i;
      in[i] = (i < kFrameLength && idx < n)
                  ? impl_->window[static_cast<std::size_t>(i)] * samples[static_cast<std::size_t>(idx)]
                  : 0.0;
    }
    fftw_execute_dft_r2c(impl_->plan, in, spec);
    for (std::size_t k = 0; k < power.size(); ++k) {
      power[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }
    for (int b = 0; b < kBands; ++b) {
      const MelFilter& filt = impl_->filters[static_cast<std::size_t>(b)];
      double e = 0.0;
      for (std::size_t j = 0; j < filt.weights.size(); ++j) {
        e += filt.weights[j] * power[static_cast<std::size_t>(filt.first_bin) + j];
      }
      out(f, b) = std::log(e + kLogFloor);
    }
  }

  fftw_free(in);
  fftw_free(spec);
  return out;
}

Eigen::VectorXd LogMelEmbedder::frame_statistics(const Eigen::MatrixXd& frames) {
  const long bands = frames.cols();
  const long n = frames.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * bands);
  for (long b = 0; b < bands; ++b) {
    // Welford keeps constant columns exact: mean == value, variance == 0.
    double mean = 0.0, m2 = 0.0;
    for (long f = 0; f < n; ++f) {
      const double x = frames(f, b);
      const double delta = x - mean;
      mean += delta / static_cast<double>(f + 1);
      m2 += delta * (x - mean);
    }
    double diff = 0.0;
    for (long f = 1; f < n; ++f) diff += std::fabs(frames(f, b) - frames(f - 1, b));
    out(b) = mean;
    out(bands + b) = n > 0 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0;
    out(2 * bands + b) = n > 1 ? diff / static_cast<double>(n - 1) : 0.0;
  }
  return out;
}

Eigen::VectorXd LogMelEmbedder::compute(std::span<const float> samples) const {
  return frame_statistics(logmel_frames(samples));
}

std::unique_ptr<Embedder> make_embedder(std::string_view backend_id) {
  if (backend_id == "builtin-logmel" || backend_id == "builtin") {
    return std::make_unique<LogMelEmbedder>();
  }
  if (known_backend(backend_id)) {
    throw ConfigError("backend '" + std::string(backend_id) +
                      "' is computed by the external extractor; pass its AEMB output instead");
  }
  throw ConfigError("unknown embedding backend '" + std::string(backend_id) + "'");
}

}  // namespace apa
