#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apa/dataset.hpp"
#include "apa/embedding.hpp"
#include "apa/error.hpp"
#include "apa/metrics.hpp"
#include "apa/rng.hpp"

namespace apa {

/// Raised when both distances are zero and the score is undefined.
class UndefinedScoreError : public MathDomainError {
 public:
  UndefinedScoreError()
      : MathDomainError("undefined score: distances to the matching and non-matching references are both zero") {}
};

/// Uniformly random permutation without fixed points, by rejection
/// sampling of Fisher-Yates shuffles. Throws DataError for n < 2.
std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng);

/// The non-matching set X': pair i keeps its prompt and receives the stem
/// of pair pi(i), pi a uniform derangement drawn from the seed.
PairSet make_nonmatching(const PairSet& x, uint64_t seed);

struct AdherenceScore {
  double value = 0.0;
  Metric metric = Metric::Fad;
  double d_matching = 0.0;     // M_X(Y)
  double d_nonmatching = 0.0;  // M_X'(Y)
  uint64_t derangement_seed = 0;
};

/// (d_nonmatching - d_matching) / (d_nonmatching + d_matching), in [-1, 1].
/// Throws UndefinedScoreError when both are zero, DataError if either is
/// negative or non-finite.
double adherence_value(double d_matching, double d_nonmatching);

/// Scores candidate embeddings against the matching reference embeddings
/// and the embeddings of the deranged reference set. All three must come
/// from the same fusion pipeline and share a dimensionality.
AdherenceScore adherence_score(Metric metric, const EmbeddingMatrix& reference,
                               const EmbeddingMatrix& reference_nonmatching,
                               const EmbeddingMatrix& candidate);

}  // namespace apa
