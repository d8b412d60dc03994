#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "gwedge/offspring.hpp"
#include "gwedge/rng.hpp"

using namespace gwedge;

TEST_CASE("moments of a simple table") {
  OffspringDistribution dist({{0, 0.25}, {2, 0.75}});
  REQUIRE(dist.mean() == Catch::Approx(1.5).epsilon(1e-15));
  REQUIRE(dist.second_moment() == Catch::Approx(3.0).epsilon(1e-15));
  REQUIRE(dist.prob(0) == Catch::Approx(0.25));
  REQUIRE(dist.prob(1) == 0.0);
  REQUIRE(dist.prob(2) == Catch::Approx(0.75));
  REQUIRE(dist.max_count() == 2);
  REQUIRE(dist.supercritical());
}

TEST_CASE("zero entries are dropped and mass renormalized") {
  OffspringDistribution dist({{0, 0.0}, {1, 0.5}, {3, 0.5 + 4e-10}});
  REQUIRE(dist.entries().size() == 2);
  REQUIRE(dist.prob(0) == 0.0);
  double total = 0.0;
  for (const auto& [k, p] : dist.entries()) total += p;
  REQUIRE(total == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("invalid tables are rejected") {
  REQUIRE_THROWS_AS(OffspringDistribution({{-1, 0.5}, {2, 0.5}}), std::invalid_argument);
  REQUIRE_THROWS_AS(OffspringDistribution({{0, 0.6}, {2, 0.6}}), std::invalid_argument);
  REQUIRE_THROWS_AS(OffspringDistribution({{0, -0.1}, {2, 1.1}}), std::invalid_argument);
  REQUIRE_THROWS_AS(OffspringDistribution({{0, 0.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(OffspringDistribution({}), std::invalid_argument);
}

TEST_CASE("birth-death embedding has the documented parameters") {
  const ModelParams params = birth_death_model(1.0, 0.5);
  REQUIRE(params.beta == Catch::Approx(1.5));
  REQUIRE(params.offspring.prob(0) == Catch::Approx(0.5 / 1.5));
  REQUIRE(params.offspring.prob(2) == Catch::Approx(1.0 / 1.5));
  REQUIRE(params.offspring.mean() == Catch::Approx(2.0 / 1.5));
  // m * beta collapses to 2 * lambda, the constant the limit laws depend on.
  REQUIRE(params.offspring.mean() * params.beta == Catch::Approx(2.0));

  const ModelParams yule = birth_death_model(1.0, 0.0);
  REQUIRE(yule.beta == Catch::Approx(1.0));
  REQUIRE(yule.offspring.prob(0) == 0.0);
  REQUIRE(yule.offspring.prob(2) == Catch::Approx(1.0));

  REQUIRE_THROWS_AS(birth_death_model(0.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(birth_death_model(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("truncation moves tail mass to zero children") {
  OffspringDistribution dist({{0, 0.1}, {2, 0.4}, {5, 0.5}});
  OffspringDistribution cut = truncate(dist, 3);
  REQUIRE(cut.prob(0) == Catch::Approx(0.6));
  REQUIRE(cut.prob(2) == Catch::Approx(0.4));
  REQUIRE(cut.prob(5) == 0.0);
  REQUIRE(cut.mean() <= dist.mean());

  OffspringDistribution untouched = truncate(dist, 5);
  REQUIRE(untouched.mean() == Catch::Approx(dist.mean()));
  REQUIRE_THROWS_AS(truncate(dist, -1), std::invalid_argument);
}

TEST_CASE("heavy-tail law is supercritical with mean below its limit") {
  OffspringDistribution dist = heavy_tail_zeta3(10000);
  REQUIRE(dist.supercritical());
  // zeta(2)/zeta(3) ~ 1.36843; the finite cutoff stays a bit below.
  REQUIRE(dist.mean() > 1.36);
  REQUIRE(dist.mean() < 1.3685);
  REQUIRE(heavy_tail_zeta3(2).mean() < dist.mean());
  REQUIRE_THROWS_AS(heavy_tail_zeta3(1), std::invalid_argument);
}

TEST_CASE("sampler inverts the cumulative table") {
  OffspringDistribution dist({{0, 0.25}, {2, 0.5}, {7, 0.25}});
  OffspringSampler sampler(dist);
  REQUIRE(sampler.sample(0.1) == 0);
  REQUIRE(sampler.sample(0.25) == 0);  // draws in (0,1]: u = c_k maps to k
  REQUIRE(sampler.sample(0.2500001) == 2);
  REQUIRE(sampler.sample(0.75) == 2);
  REQUIRE(sampler.sample(0.76) == 7);
  REQUIRE(sampler.sample(1.0) == 7);
}

TEST_CASE("sampled frequencies match the table") {
  OffspringDistribution dist({{0, 0.3}, {1, 0.2}, {4, 0.5}});
  OffspringSampler sampler(dist);
  CounterRng rng(123, StreamDomain::auxiliary, 0);
  const int n = 200000;
  std::map<int, int> hits;
  for (int i = 0; i < n; ++i) ++hits[sampler.sample(rng.next_unit())];
  for (const auto& [k, p] : dist.entries()) {
    const double freq = static_cast<double>(hits[k]) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    REQUIRE(std::abs(freq - p) < 4.0 * se);
  }
}
