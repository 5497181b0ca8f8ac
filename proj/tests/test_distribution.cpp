#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "finitekey/distribution.hpp"

using namespace finitekey;
using Catch::Approx;

namespace {

EmpiricalDistribution ideal(std::vector<double> probs) {
  return EmpiricalDistribution::validated(std::move(probs), 0);
}

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(d);
  double sum = 0.0;
  for (auto& x : p) {
    x = -std::log(u(rng) + 1e-12);
    sum += x;
  }
  for (auto& x : p) x /= sum;
  // re-normalize exactly
  double s2 = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) s2 += p[i];
  p.back() = 1.0 - s2;
  return p;
}

}  // namespace

TEST_CASE("binary entropy point values") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  // high-precision evaluation of -p log2 p - (1-p) log2 (1-p) at p = 0.05
  CHECK(binary_entropy(0.05) == Approx(0.2863969571).margin(1e-9));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);
}

TEST_CASE("binary entropy is symmetric") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double p = u(rng);
    CHECK(binary_entropy(p) == Approx(binary_entropy(1.0 - p)).margin(1e-14));
  }
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(ideal({0.25, 0.25, 0.25, 0.25})) == Approx(2.0));
  CHECK(shannon_entropy(ideal({1.0, 0.0, 0.0, 0.0})) == 0.0);
  // the depolarizing q=0.1 Choi spectrum, high-precision oracle value
  CHECK(shannon_entropy(ideal({0.925, 0.025, 0.025, 0.025})) ==
        Approx(0.5031837317).margin(1e-9));
}

TEST_CASE("relative entropy") {
  const auto p = ideal({0.3, 0.7});
  CHECK(relative_entropy(p, p) == Approx(0.0).margin(1e-15));
  CHECK(relative_entropy(ideal({1.0, 0.0}), ideal({0.5, 0.5})) == Approx(1.0));
  CHECK(std::isinf(relative_entropy(ideal({0.5, 0.5}), ideal({1.0, 0.0}))));
  CHECK_THROWS_AS(relative_entropy(p, ideal({0.5, 0.25, 0.25})),
                  std::invalid_argument);
}

TEST_CASE("variational distance") {
  const auto p = ideal({0.3, 0.7});
  CHECK(variational_distance(p, p) == 0.0);
  CHECK(variational_distance(ideal({1.0, 0.0}), ideal({0.0, 1.0})) == 2.0);
  CHECK(variational_distance(ideal({0.6, 0.4}), ideal({0.5, 0.5})) ==
        Approx(0.2));
  CHECK_THROWS_AS(variational_distance(p, ideal({1.0, 0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("Pinsker inequality on random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> dsize(2, 16);
  for (int i = 0; i < 500; ++i) {
    const std::size_t d = dsize(rng);
    const auto p = ideal(random_distribution(rng, d));
    const auto q = ideal(random_distribution(rng, d));
    const double dv = variational_distance(p, q);
    const double dr = relative_entropy(p, q);
    if (std::isinf(dr)) continue;
    CHECK(dv <= std::sqrt(2.0 * std::numbers::ln2 * dr) + 1e-12);
  }
}

TEST_CASE("relative entropy is nonnegative, zero only at equality") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 300; ++i) {
    const auto p = ideal(random_distribution(rng, 8));
    const auto q = ideal(random_distribution(rng, 8));
    const double d = relative_entropy(p, q);
    CHECK(d >= -1e-13);
    if (d < 1e-9) CHECK(variational_distance(p, q) < 1e-4);
  }
}

TEST_CASE("variational distance is a metric") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 300; ++i) {
    const auto p = ideal(random_distribution(rng, 6));
    const auto q = ideal(random_distribution(rng, 6));
    const auto r = ideal(random_distribution(rng, 6));
    CHECK(variational_distance(p, q) ==
          Approx(variational_distance(q, p)).margin(1e-14));
    CHECK(variational_distance(p, r) <=
          variational_distance(p, q) + variational_distance(q, r) + 1e-12);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(EmpiricalDistribution::validated({0.5, 0.4}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalDistribution::validated({1.2, -0.2}, 0),
                  std::invalid_argument);
  // with m > 0 every entry must be a multiple of 1/m
  CHECK_NOTHROW(EmpiricalDistribution::validated({0.25, 0.75}, 4));
  CHECK_THROWS_AS(EmpiricalDistribution::validated({0.3, 0.7}, 4),
                  std::invalid_argument);
  // m = 0 marks an idealized statistic, no multiple check
  CHECK_NOTHROW(EmpiricalDistribution::validated({0.3, 0.7}, 0));
}
