#include "apa/adherence.hpp"

#include <cmath>
#include <numeric>

namespace apa {

std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw DataError("a derangement needs at least 2 elements");
  std::vector<std::size_t> perm(n);
  for (;;) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
    if (!fixed) return perm;
  }
}

PairSet make_nonmatching(const PairSet& x, uint64_t seed) {
  if (x.size() < 2) throw DataError("make_nonmatching: need at least 2 pairs");
  Rng rng(derive_seed(seed, "derangement"));
  const std::vector<std::size_t> perm = random_derangement(x.size(), rng);
  std::vector<PairEntry> entries = x.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const PairEntry& donor = x.entry(perm[i]);
    entries[i].stem_origin = donor.stem_origin;
    entries[i].perturbation = donor.perturbation;
    entries[i].perturbation.tag = "random";
  }
  return x.with_entries(std::move(entries));
}

double adherence_value(double d_matching, double d_nonmatching) {
  if (!std::isfinite(d_matching) || !std::isfinite(d_nonmatching) || d_matching < 0.0 ||
      d_nonmatching < 0.0) {
    throw DataError("adherence score needs finite non-negative distances");
  }
  const double denom = d_nonmatching + d_matching;
  if (denom == 0.0) throw UndefinedScoreError();
  return (d_nonmatching - d_matching) / denom;
}

AdherenceScore adherence_score(Metric metric, const EmbeddingMatrix& reference,
                               const EmbeddingMatrix& reference_nonmatching,
                               const EmbeddingMatrix& candidate) {
  if (reference.cols() != candidate.cols() || reference_nonmatching.cols() != candidate.cols()) {
    throw DataError("adherence_score: embedding dimensionalities differ");
  }
  AdherenceScore s;
  s.metric = metric;
  s.d_matching = distance(metric, reference, candidate);
  s.d_nonmatching = distance(metric, reference_nonmatching, candidate);
  s.value = adherence_value(s.d_matching, s.d_nonmatching);
  return s;
}

}  // namespace apa
