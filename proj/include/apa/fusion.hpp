#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Core>

#include "apa/audio.hpp"
#include "apa/dataset.hpp"
#include "apa/embedding.hpp"
#include "apa/projection.hpp"

namespace apa {

/// How a (prompt, stem) pair becomes one vector.
///   Mix:  projection(embed(prompt + stem))          early fusion, D
///   Sum:  projection(embed(prompt) + embed(stem))   late fusion, D
///   Conc: projection([embed(prompt), embed(stem)])  late fusion, 2D
enum class FusionMethod { Mix, Sum, Conc };

std::string to_string(FusionMethod m);
FusionMethod parse_fusion(std::string_view name);

/// Dimensionality of the fused vector before projection.
std::size_t fused_dim(FusionMethod m, std::size_t embedding_dim);

Eigen::VectorXd fuse_mix(const AudioWindow& prompt, const AudioWindow& stem, const Embedder& embedder,
                         const Projection& projection, const MixPolicy& mix = {});
Eigen::VectorXd fuse_sum(const AudioWindow& prompt, const AudioWindow& stem, const Embedder& embedder,
                         const Projection& projection);
Eigen::VectorXd fuse_concat(const AudioWindow& prompt, const AudioWindow& stem,
                            const Embedder& embedder, const Projection& projection);

/// Memoizes embeddings by a content hash of the waveform and the backend.
/// Thread-safe.
class EmbeddingCache {
 public:
  Eigen::VectorXd get_or_compute(const AudioWindow& window, const Embedder& embedder);

  std::size_t size() const;
  std::size_t hits() const;

  static uint64_t content_hash(const AudioWindow& window, std::string_view backend_id);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<uint64_t, Eigen::VectorXd> entries_;
  std::size_t hits_ = 0;
};

/// Unprojected fused embeddings of every pair, row i for pair i.
/// Rows are computed in parallel into their own slots. The cache is optional.
EmbeddingMatrix fuse_pairs(const PairSet& pairs, FusionMethod method, const Embedder& embedder,
                           EmbeddingCache* cache = nullptr);

}  // namespace apa
