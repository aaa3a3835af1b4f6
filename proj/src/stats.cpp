#include "apa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "apa/error.hpp"

namespace apa {

std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
    case Alternative::TwoSided: return "two_sided";
  }
  return "greater";
}

Alternative parse_alternative(std::string_view name) {
  if (name == "greater") return Alternative::Greater;
  if (name == "less") return Alternative::Less;
  if (name == "two_sided" || name == "two-sided") return Alternative::TwoSided;
  throw ConfigError("unknown alternative '" + std::string(name) + "'");
}

double binomial_half_upper_tail(std::size_t n, std::size_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (n <= 62) {
    // Sum of C(n, i) for i >= k, exact in 64-bit integers.
    uint64_t c = 1;  // C(n, 0)
    uint64_t sum = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i >= k) sum += c;
      c = c * (n - i) / (i + 1);
    }
    return std::ldexp(static_cast<double>(sum), -static_cast<int>(n));
  }
  // Log-space summation for large n.
  const double log_half_n = -static_cast<double>(n) * std::log(2.0);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double max_term = -INFINITY;
  for (std::size_t i = k; i <= n; ++i) {
    const double t = lg_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
                     std::lgamma(static_cast<double>(n - i) + 1.0) + log_half_n;
    max_term = std::max(max_term, t);
  }
  double acc = 0.0;
  for (std::size_t i = k; i <= n; ++i) {
    const double t = lg_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
                     std::lgamma(static_cast<double>(n - i) + 1.0) + log_half_n;
    acc += std::exp(t - max_term);
  }
  return std::min(1.0, std::exp(max_term) * acc);
}

SignTestResult sign_test(std::span<const double> diffs, Alternative alternative) {
  if (diffs.empty()) throw DataError("sign_test: no differences");
  SignTestResult r;
  for (double d : diffs) {
    if (std::isnan(d)) throw DataError("sign_test: NaN difference");
    if (d == 0.0) continue;
    ++r.n_effective;
    if (d > 0.0) ++r.n_positive;
  }
  if (r.n_effective == 0) throw DataError("sign_test: all differences are ties");
  const std::size_t n = r.n_effective;
  const std::size_t neg = n - r.n_positive;
  const double upper = binomial_half_upper_tail(n, r.n_positive);
  const double lower = binomial_half_upper_tail(n, neg);
  switch (alternative) {
    case Alternative::Greater: r.p_value = upper; break;
    case Alternative::Less: r.p_value = lower; break;
    case Alternative::TwoSided: r.p_value = std::min(1.0, 2.0 * std::min(upper, lower)); break;
  }
  return r;
}

double cles(std::span<const double> perturbed, std::span<const double> matching) {
  if (perturbed.empty() || matching.empty()) throw DataError("cles: empty sample");
  double wins = 0.0;
  for (double b : perturbed) {
    for (double c : matching) {
      if (b < c) {
        wins += 1.0;
      } else if (b == c) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(perturbed.size()) * static_cast<double>(matching.size()));
}

int significance_stars(double p_value) {
  if (p_value <= 0.001) return 3;
  if (p_value <= 0.01) return 2;
  if (p_value <= 0.05) return 1;
  return 0;
}

}  // namespace apa
