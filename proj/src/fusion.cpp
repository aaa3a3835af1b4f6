#include "apa/fusion.hpp"

#include <cstring>

#include "apa/error.hpp"
#include "apa/parallel.hpp"

namespace apa {
namespace {

void require_compatible(const AudioWindow& a, const AudioWindow& b) {
  if (a.sample_rate != b.sample_rate) throw DataError("fusion: prompt and stem sample rates differ");
  if (a.size() != b.size()) throw DataError("fusion: prompt and stem lengths differ");
}

Eigen::VectorXd embed_with(const AudioWindow& w, const Embedder& e, EmbeddingCache* cache) {
  return cache ? cache->get_or_compute(w, e) : e.embed(w);
}

Eigen::VectorXd fuse_unprojected(FusionMethod method, const AudioWindow& prompt,
                                 const AudioWindow& stem, const Embedder& embedder,
                                 const MixPolicy& mix_policy, EmbeddingCache* cache) {
  require_compatible(prompt, stem);
  switch (method) {
    case FusionMethod::Mix:
      return embed_with(mix(prompt, stem, mix_policy), embedder, cache);
    case FusionMethod::Sum:
      return embed_with(prompt, embedder, cache) + embed_with(stem, embedder, cache);
    case FusionMethod::Conc: {
      const Eigen::VectorXd p = embed_with(prompt, embedder, cache);
      const Eigen::VectorXd s = embed_with(stem, embedder, cache);
      Eigen::VectorXd out(p.size() + s.size());
      out << p, s;
      return out;
    }
  }
  throw ConfigError("unknown fusion method");
}

}  // namespace

std::string to_string(FusionMethod m) {
  switch (m) {
    case FusionMethod::Mix: return "mix";
    case FusionMethod::Sum: return "sum";
    case FusionMethod::Conc: return "conc";
  }
  return "mix";
}

FusionMethod parse_fusion(std::string_view name) {
  if (name == "mix" || name == "MIX") return FusionMethod::Mix;
  if (name == "sum" || name == "SUM") return FusionMethod::Sum;
  if (name == "conc" || name == "CONC" || name == "concat") return FusionMethod::Conc;
  throw ConfigError("unknown fusion method '" + std::string(name) + "' (expected mix, sum or conc)");
}

std::size_t fused_dim(FusionMethod m, std::size_t embedding_dim) {
  return m == FusionMethod::Conc ? 2 * embedding_dim : embedding_dim;
}

Eigen::VectorXd fuse_mix(const AudioWindow& prompt, const AudioWindow& stem, const Embedder& embedder,
                         const Projection& projection, const MixPolicy& mix) {
  return projection.apply(fuse_unprojected(FusionMethod::Mix, prompt, stem, embedder, mix, nullptr));
}

Eigen::VectorXd fuse_sum(const AudioWindow& prompt, const AudioWindow& stem, const Embedder& embedder,
                         const Projection& projection) {
  return projection.apply(fuse_unprojected(FusionMethod::Sum, prompt, stem, embedder, {}, nullptr));
}

Eigen::VectorXd fuse_concat(const AudioWindow& prompt, const AudioWindow& stem,
                            const Embedder& embedder, const Projection& projection) {
  return projection.apply(fuse_unprojected(FusionMethod::Conc, prompt, stem, embedder, {}, nullptr));
}

uint64_t EmbeddingCache::content_hash(const AudioWindow& window, std::string_view backend_id) {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(window.sample_rate);
  auto mix_word = [&h](uint64_t w) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
  };
  for (unsigned char c : backend_id) mix_word(c);
  const std::size_t n = window.samples.size();
  mix_word(n);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64_t w;
    std::memcpy(&w, window.samples.data() + i, 8);
    mix_word(w);
  }
  if (i < n) {
    uint32_t w;
    std::memcpy(&w, window.samples.data() + i, 4);
    mix_word(w);
  }
  return h;
}

Eigen::VectorXd EmbeddingCache::get_or_compute(const AudioWindow& window, const Embedder& embedder) {
  const uint64_t key = content_hash(window, embedder.spec().backend_id);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  Eigen::VectorXd v = embedder.embed(window);
  std::lock_guard lock(mutex_);
  entries_.emplace(key, v);
  return v;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t EmbeddingCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

EmbeddingMatrix fuse_pairs(const PairSet& pairs, FusionMethod method, const Embedder& embedder,
                           EmbeddingCache* cache) {
  if (pairs.size() == 0) throw DataError("fuse_pairs: empty pair set");
  const std::size_t dim = fused_dim(method, embedder.spec().dim);
  EmbeddingMatrix out;
  out.data.resize(static_cast<long>(pairs.size()), static_cast<long>(dim));
  out.backend_id = embedder.spec().backend_id + "/" + to_string(method);
  parallel_for(pairs.size(), [&](std::size_t i) {
    const Eigen::VectorXd v = fuse_unprojected(method, pairs.prompt(i), pairs.stem(i), embedder,
                                               pairs.info().mix, cache);
    out.data.row(static_cast<long>(i)) = v.cast<float>().transpose();
  });
  return out;
}

}  // namespace apa
