#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace apa {

enum class Alternative { Greater, Less, TwoSided };

std::string to_string(Alternative a);
Alternative parse_alternative(std::string_view name);

struct SignTestResult {
  double p_value = 1.0;
  std::size_t n_effective = 0;  // non-zero differences
  std::size_t n_positive = 0;
};

/// Exact sign test on paired differences. Zeros are dropped; the p-value
/// is the Binomial(n_effective, 1/2) tail. `Greater` tests for positive
/// differences. Two-sided p = min(1, 2 * min(tails)).
/// Throws DataError for an empty list or when every difference is zero.
SignTestResult sign_test(std::span<const double> diffs, Alternative alternative = Alternative::Greater);

/// P(X >= k) for X ~ Binomial(n, 1/2). Exact k/2^n for n <= 53.
double binomial_half_upper_tail(std::size_t n, std::size_t k);

/// Common language effect size: the fraction of cross pairs (b, c) with
/// b < c, ties counting one half. Throws DataError on empty input.
double cles(std::span<const double> perturbed, std::span<const double> matching);

/// 0-3 stars at the 0.05 / 0.01 / 0.001 levels.
int significance_stars(double p_value);

}  // namespace apa
