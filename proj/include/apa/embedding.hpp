#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "apa/audio.hpp"

namespace apa {

/// N x D matrix of per-window embeddings, the currency between stages.
/// Storage is float32, row-major, matching the AEMB payload layout.
struct EmbeddingMatrix {
  using Storage = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Storage data;
  std::string backend_id;

  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data.cols()); }
  Eigen::MatrixXd to_double() const { return data.cast<double>(); }

  static EmbeddingMatrix from_double(const Eigen::MatrixXd& m, std::string backend_id);
};

/// Throws DataError unless the matrix is non-empty and every entry finite.
void validate(const EmbeddingMatrix& m);

/// Declared contract of an embedding function.
struct EmbedderSpec {
  std::string backend_id;
  std::size_t dim = 0;
  double window_seconds = 5.0;
  int sample_rate = kPipelineSampleRate;
};

/// Specs of the known backends: `builtin-logmel` and the externally
/// extracted pretrained layers `vggish`, `openl3`, `clap0`, `clap1`, `clap2`.
std::optional<EmbedderSpec> known_backend(std::string_view backend_id);

/// An embedding function mapping a mono window to a D-vector.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual const EmbedderSpec& spec() const = 0;

  /// Validates the window (rate match, finite samples) and embeds it.
  /// Pure: identical input yields a bit-identical vector.
  Eigen::VectorXd embed(const AudioWindow& window) const;

 protected:
  virtual Eigen::VectorXd compute(std::span<const float> samples) const = 0;
};

/// Built-in log-mel statistics embedder (`builtin-logmel`, D = 192).
///
/// 16 kHz input; 25 ms Hann frames at a 10 ms hop, 512-point FFT, power
/// spectrum through 64 HTK-mel triangular filters spanning 125-7500 Hz,
/// natural log with a 1e-8 floor. The embedding is the per-band mean,
/// per-band standard deviation, and per-band mean absolute frame-to-frame
/// difference, concatenated in that order.
class LogMelEmbedder final : public Embedder {
 public:
  static constexpr int kSampleRate = 16000;
  static constexpr int kFrameLength = 400;
  static constexpr int kHop = 160;
  static constexpr int kFftSize = 512;
  static constexpr int kBands = 64;
  static constexpr double kMinHz = 125.0;
  static constexpr double kMaxHz = 7500.0;
  static constexpr double kLogFloor = 1e-8;

  LogMelEmbedder();
  ~LogMelEmbedder() override;

  const EmbedderSpec& spec() const override { return spec_; }

  /// Log-mel spectrogram, one row per frame.
  Eigen::MatrixXd logmel_frames(std::span<const float> samples) const;

  /// The embedding statistics of a frame matrix.
  static Eigen::VectorXd frame_statistics(const Eigen::MatrixXd& frames);

 protected:
  Eigen::VectorXd compute(std::span<const float> samples) const override;

 private:
  struct Impl;
  EmbedderSpec spec_;
  std::unique_ptr<Impl> impl_;
};

/// Construct the embedder for a backend id. Only `builtin-logmel` can be
/// computed in-process; pretrained backends throw ConfigError.
std::unique_ptr<Embedder> make_embedder(std::string_view backend_id);

}  // namespace apa
