#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finitekey/binomial.hpp"
#include "finitekey/distribution.hpp"

using namespace finitekey;
using Catch::Approx;

namespace {

// Independent exact binomial lower-tail oracle: pmf by recurrence in long
// double, no log-gamma, no shared code with the implementation.
long double tail_oracle(std::uint64_t m, long double p, long double delta) {
  const auto kmax = static_cast<std::int64_t>(
      std::floor(static_cast<long double>(m) * (p - delta) + 1e-12L));
  if (kmax < 0) return 0.0L;
  if (p <= 0.0L) return 1.0L;
  if (p >= 1.0L) return kmax >= static_cast<std::int64_t>(m) ? 1.0L : 0.0L;
  long double pmf = powl(1.0L - p, static_cast<long double>(m));  // k = 0
  long double sum = pmf;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    pmf *= static_cast<long double>(m - static_cast<std::uint64_t>(k) + 1) /
           static_cast<long double>(k) * p / (1.0L - p);
    sum += pmf;
  }
  return sum;
}

// Independent Clopper-Pearson-style upper limit: bisect the oracle CDF.
double clopper_pearson_upper(std::uint64_t m, std::uint64_t k, double eps) {
  double lo = static_cast<double>(k) / static_cast<double>(m), hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const long double tail = tail_oracle(
        m, mid, mid - static_cast<double>(k) / static_cast<double>(m));
    if (tail <= eps)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("log2 binomial") {
  CHECK(log2_binomial(17, 0) == 0.0);
  CHECK(log2_binomial(10, 5) == Approx(7.9772799235).margin(1e-9));
  CHECK_THROWS_AS(log2_binomial(5, 6), std::invalid_argument);
  // entropy envelope: C(m, n) <= 2^{m h(n/m)} / sqrt(2 pi m l (1-l))
  const double m = 1e6;
  const double envelope =
      m * binary_entropy(0.5) - std::log2(std::sqrt(2.0 * std::numbers::pi * m * 0.25)) + 1.0;
  CHECK(log2_binomial(1000000, 500000) <= envelope);
}

TEST_CASE("chernoff tail") {
  CHECK(chernoff_tail(123, 0.3, 0.0) == 1.0);
  // 2^{-m D(0.05 || 0.0612)}, D = 1.674010e-3 bits
  CHECK(chernoff_tail(10000, 0.0612, 0.0112) ==
        Approx(9.1354e-6).epsilon(0.01));
  CHECK(chernoff_tail(20, 0.5, 0.3) >=
        static_cast<double>(tail_oracle(20, 0.5L, 0.3L)));
  CHECK_THROWS_AS(chernoff_tail(10, 0.2, 0.3), std::invalid_argument);
}

TEST_CASE("factorial moment tail") {
  const double fm = factorial_moment_tail(20, 0.5, 0.3);
  CHECK(fm >= static_cast<double>(tail_oracle(20, 0.5L, 0.3L)));
  CHECK(fm <= chernoff_tail(20, 0.5, 0.3));
  const double fm2 = factorial_moment_tail(100, 0.1, 0.05);
  CHECK(fm2 >= static_cast<double>(tail_oracle(100, 0.1L, 0.05L)));
  CHECK(fm2 <= chernoff_tail(100, 0.1, 0.05) + 1e-15);
  // decreasing in delta
  CHECK(factorial_moment_tail(10, 0.5, 0.5) <=
        factorial_moment_tail(10, 0.5, 0.4));
  // delta = p reproduces the exact point mass P[X = 0]
  CHECK(factorial_moment_tail(10, 0.5, 0.5) ==
        Approx(std::pow(0.5, 10)).epsilon(1e-9));
  CHECK_THROWS_AS(factorial_moment_tail(10, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("klar tail") {
  const auto k1 = klar_tail(20, 0.5, 0.25);
  REQUIRE(k1.has_value());
  CHECK(*k1 >= static_cast<double>(tail_oracle(20, 0.5L, 0.25L)));
  const auto k2 = klar_tail(100, 0.2, 0.1);
  REQUIRE(k2.has_value());
  CHECK(*k2 >= static_cast<double>(tail_oracle(100, 0.2L, 0.1L)));
  CHECK(*k2 <= 1.0);
  // log-space arithmetic survives huge m
  const auto k3 = klar_tail(10000000, 0.03, 0.004);
  REQUIRE(k3.has_value());
  CHECK(*k3 >= 0.0);
  CHECK(std::isfinite(*k3));
}

TEST_CASE("exact tail") {
  CHECK(exact_tail(2, 0.5, 0.5) == Approx(0.25));
  CHECK(exact_tail(1, 1.0, 1.0) == 0.0);
  CHECK(exact_tail(3, 0.5, 1.0 / 6.0) == Approx(0.5));
  CHECK_THROWS_AS(exact_tail(100001, 0.5, 0.1), std::invalid_argument);
  // agreement with the independent recurrence oracle
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> up(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t m = 1 + rng() % 400;
    const double p = up(rng);
    const double delta = p * up(rng);
    CHECK(exact_tail(m, p, delta) ==
          Approx(static_cast<double>(tail_oracle(m, p, delta))).margin(1e-12));
  }
}

TEST_CASE("all bounds dominate the exact tail on a grid") {
  for (std::uint64_t m : {20u, 100u, 400u, 1000u}) {
    for (double p : {0.05, 0.1, 0.25, 0.5, 0.8}) {
      for (double frac : {0.2, 0.5, 0.9}) {
        const double delta = p * frac;
        const double exact = static_cast<double>(tail_oracle(m, p, delta));
        CHECK(chernoff_tail(m, p, delta) >= exact - 1e-14);
        CHECK(factorial_moment_tail(m, p, delta) >= exact - 1e-14);
        CHECK(klar_tail(m, p, delta).value_or(1.0) >= exact - 1e-14);
      }
    }
  }
}

TEST_CASE("invert_bound point values") {
  // Chernoff: D(0.05 || C) = log2(1e5)/1e4, bisection oracle gives 0.0611535
  const auto ch = invert_bound(TailBoundKind::chernoff, 10000, 0.05, 1e-5);
  CHECK(ch.upper == Approx(0.0611535).margin(2e-4));
  CHECK(ch.level == Approx(1.0 - 1e-5));
  CHECK(ch.observed <= ch.upper);
  CHECK(ch.upper <= 1.0);

  // observed = 1 pins the interval at 1
  CHECK(invert_bound(TailBoundKind::klar, 100, 1.0, 0.01).upper == 1.0);

  // exact inversion matches an independent Clopper-Pearson root-finder
  const auto ex = invert_bound(TailBoundKind::exact, 100, 0.05, 0.05);
  CHECK(ex.upper == Approx(clopper_pearson_upper(100, 5, 0.05)).margin(1e-6));
  CHECK(ex.upper == Approx(0.1022534).margin(1e-5));
}

TEST_CASE("invert_bound dominance ordering") {
  for (std::uint64_t m : {50u, 200u, 1000u}) {
    for (double obs : {0.02, 0.05, 0.1, 0.3}) {
      for (double eps : {0.1, 0.01, 1e-4}) {
        const double ce = m <= kExactTailMaxSamples
                              ? invert_bound(TailBoundKind::exact, m, obs, eps).upper
                              : 0.0;
        const double cf =
            invert_bound(TailBoundKind::factorial_moment, m, obs, eps).upper;
        const double cc = invert_bound(TailBoundKind::chernoff, m, obs, eps).upper;
        CHECK(ce <= cf + 1e-9);
        CHECK(cf <= cc + 1e-9);
      }
    }
  }
}

TEST_CASE("invert_bound monotonicity") {
  for (auto kind : {TailBoundKind::chernoff, TailBoundKind::factorial_moment,
                    TailBoundKind::klar}) {
    // nonincreasing in m
    double prev = 1.0;
    for (std::uint64_t m : {100u, 1000u, 10000u, 100000u}) {
      const double c = invert_bound(kind, m, 0.05, 1e-3).upper;
      CHECK(c <= prev + 1e-9);
      prev = c;
    }
    // nondecreasing in observed
    double prev_obs = 0.0;
    for (double obs : {0.0, 0.02, 0.05, 0.2, 0.5}) {
      const double c = invert_bound(kind, 1000, obs, 1e-3).upper;
      CHECK(c >= prev_obs - 1e-9);
      prev_obs = c;
    }
  }
}

TEST_CASE("invert_bound at observed zero") {
  // all three closed-form bounds collapse to (1-C)^m = eps at observed = 0
  const double expected = 1.0 - std::pow(1e-3, 1.0 / 500.0);
  for (auto kind : {TailBoundKind::chernoff, TailBoundKind::factorial_moment,
                    TailBoundKind::klar}) {
    CHECK(invert_bound(kind, 500, 0.0, 1e-3).upper ==
          Approx(expected).margin(1e-6));
  }
}

TEST_CASE("invert_bound input validation") {
  CHECK_THROWS_AS(invert_bound(TailBoundKind::chernoff, 0, 0.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_bound(TailBoundKind::chernoff, 10, 1.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_bound(TailBoundKind::chernoff, 10, 0.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_bound(TailBoundKind::exact, 200000, 0.5, 0.1),
                  std::invalid_argument);
}

TEST_CASE("Monte Carlo conservativeness, small smoke version") {
  // the acceptance suite runs the full grid; this is one cell per kind
  std::mt19937_64 rng(99);
  const std::uint64_t m = 200;
  const double p = 0.1, eps = 0.05;
  std::binomial_distribution<std::uint64_t> bin(m, p);
  for (auto kind : {TailBoundKind::chernoff, TailBoundKind::factorial_moment,
                    TailBoundKind::klar, TailBoundKind::exact}) {
    int cover = 0;
    const int trials = 4000;
    std::vector<double> memo(m + 1, -1.0);
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t x = bin(rng);
      if (memo[x] < 0.0)
        memo[x] = invert_bound(kind, m, static_cast<double>(x) / static_cast<double>(m), eps).upper;
      if (memo[x] >= p) ++cover;
    }
    const double coverage = static_cast<double>(cover) / trials;
    const double slack = 3.0 * std::sqrt(eps * (1 - eps) / trials);
    CHECK(coverage >= 1.0 - eps - slack);
  }
}
