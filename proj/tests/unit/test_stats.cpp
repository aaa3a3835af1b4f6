#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "apa/error.hpp"
#include "apa/stats.hpp"

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST(SignTest, ExactTails) {
  const std::vector<double> five(5, 1.0);
  EXPECT_EQ(apa::sign_test(five).p_value, 0.03125);
  EXPECT_EQ(apa::sign_test(std::vector<double>(20, 0.1)).p_value, std::ldexp(1.0, -20));

  const std::vector<double> mixed{1, 2, 3, -1, -2};
  const auto r = apa::sign_test(mixed);
  EXPECT_EQ(r.p_value, 0.5);
  EXPECT_EQ(r.n_effective, 5u);
  EXPECT_EQ(r.n_positive, 3u);
}

TEST(SignTest, ZerosAreDroppedAndAlternatives) {
  const std::vector<double> d{0, 1, 1, 0, 1, -1};
  const auto g = apa::sign_test(d, apa::Alternative::Greater);
  EXPECT_EQ(g.n_effective, 4u);
  EXPECT_EQ(g.n_positive, 3u);
  EXPECT_DOUBLE_EQ(g.p_value, (binom(4, 3) + binom(4, 4)) / 16.0);
  const auto l = apa::sign_test(d, apa::Alternative::Less);
  EXPECT_DOUBLE_EQ(l.p_value, (binom(4, 0) + binom(4, 1) + binom(4, 2) + binom(4, 3)) / 16.0);
  const auto t = apa::sign_test(d, apa::Alternative::TwoSided);
  EXPECT_DOUBLE_EQ(t.p_value, std::min(1.0, 2.0 * std::min(g.p_value, l.p_value)));

  EXPECT_THROW(apa::sign_test(std::vector<double>{}), apa::DataError);
  EXPECT_THROW(apa::sign_test(std::vector<double>{0.0, 0.0}), apa::DataError);
  EXPECT_EQ(apa::parse_alternative("two_sided"), apa::Alternative::TwoSided);
  EXPECT_THROW(apa::parse_alternative("bigger"), apa::ConfigError);
}

TEST(SignTest, UpperTailMatchesEnumeration) {
  for (int n = 1; n <= 40; ++n) {
    for (int k = 0; k <= n + 1; ++k) {
      double expected = 0.0;
      for (int j = k; j <= n; ++j) expected += binom(n, j);
      expected = std::ldexp(expected, -n);
      EXPECT_NEAR(apa::binomial_half_upper_tail(n, k), expected, 1e-14 * std::max(1.0, expected));
    }
  }
  // Large n stays a probability and is monotone in k.
  double prev = 1.0;
  for (std::size_t k = 0; k <= 500; k += 25) {
    const double p = apa::binomial_half_upper_tail(500, k);
    EXPECT_LE(p, prev + 1e-15);
    EXPECT_GE(p, 0.0);
    prev = p;
  }
  EXPECT_NEAR(apa::binomial_half_upper_tail(500, 250), 0.5 + 0.5 * binom(500, 250) * std::ldexp(1.0, -500), 1e-12);
}

TEST(Cles, Enumeration) {
  const std::vector<double> a{0.1, 0.4, 0.9};
  EXPECT_EQ(apa::cles(a, a), 0.5);
  EXPECT_EQ(apa::cles(std::vector<double>{-1, -2}, std::vector<double>{0, 1, 2}), 1.0);
  EXPECT_EQ(apa::cles(std::vector<double>{1, 3}, std::vector<double>{2}), 0.5);
  EXPECT_EQ(apa::cles(std::vector<double>{5}, std::vector<double>{1, 2}), 0.0);
  EXPECT_THROW(apa::cles(std::vector<double>{}, a), apa::DataError);
  EXPECT_THROW(apa::cles(a, std::vector<double>{}), apa::DataError);
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(apa::significance_stars(9.5e-7), 3);
  EXPECT_EQ(apa::significance_stars(0.001), 3);
  EXPECT_EQ(apa::significance_stars(0.005), 2);
  EXPECT_EQ(apa::significance_stars(0.03125), 1);
  EXPECT_EQ(apa::significance_stars(0.05), 1);
  EXPECT_EQ(apa::significance_stars(0.2), 0);
}

}  // namespace
