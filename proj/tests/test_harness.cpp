#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "gwedge/harness.hpp"
#include "gwedge/stats.hpp"

using namespace gwedge;
using namespace gwedge::harness;

namespace {

ExperimentConfig cheap_bd_config() {
  ExperimentConfig config;
  config.model = ModelSpec::birth_death(1.0, 0.5);
  config.horizon_t = 10.0;
  config.offsets_x = {-0.5, 0.0, 0.5};
  config.ks = {1, 2};
  config.replicates = 3000;
  config.master_seed = 4242;
  return config;
}

}  // namespace

TEST_CASE("martingale samples: pure birth keeps every replicate at mean one") {
  const ModelParams yule = birth_death_model(1.0, 0.0);
  const std::vector<double> samples = estimate_m_infty(yule, 6.0, 2000, 11);
  REQUIRE(samples.size() == 2000);  // no extinction without deaths
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / 2000.0;
  // Var M_s = 1 - e^{-s} < 1, so 4 SE is under 0.09
  REQUIRE(std::abs(mean - 1.0) < 0.09);
  for (double v : samples) REQUIRE(v > 0.0);
}

TEST_CASE("martingale samples: certain death yields an empty list") {
  // A replicate only registers while its root outlives the horizon, which at
  // s=40 has probability e^{-40} per replicate; every draw dies first.
  const ModelParams doomed(1.0, OffspringDistribution({{0, 1.0}}));
  REQUIRE(estimate_m_infty(doomed, 40.0, 500, 3).empty());
}

TEST_CASE("martingale samples are deterministic across worker counts") {
  const ModelParams bd = birth_death_model(1.0, 0.5);
  const std::vector<double> one = estimate_m_infty(bd, 8.0, 2000, 77, 1);
  const std::vector<double> four = estimate_m_infty(bd, 8.0, 2000, 77, 4);
  REQUIRE(one == four);
  // survivors only, in replicate order, strictly positive
  for (double v : one) REQUIRE(v > 0.0);
  REQUIRE(one.size() < 2000);  // extinction removes some replicates
  REQUIRE(one.size() > 800);   // but around half survive
}

TEST_CASE("count experiment report structure and conditioning") {
  const auto config = cheap_bd_config();
  const CountExperimentReport report = run_count_experiment(config);

  REQUIRE(report.survival.replicates == config.replicates);
  REQUIRE(report.survival.survivors >= MIN_SURVIVORS);
  // conditioning identity: fraction * replicates = survivors exactly
  REQUIRE(report.survival.fraction * static_cast<double>(config.replicates) ==
          Catch::Approx(static_cast<double>(report.survival.survivors)).epsilon(1e-15));
  REQUIRE(report.law_used == analytics::LimitLawKind::closed_form_birth_death);
  REQUIRE(report.mixture_samples_used == 0);
  REQUIRE(report.cells.size() == 9);  // 3 classes x 3 offsets

  for (const CountCell& cell : report.cells) {
    const double emp_total =
        std::accumulate(cell.empirical_pmf.begin(), cell.empirical_pmf.end(), 0.0);
    REQUIRE(emp_total == Catch::Approx(1.0).epsilon(1e-12));
    const double pred_total =
        std::accumulate(cell.predicted_pmf.begin(), cell.predicted_pmf.end(), 0.0);
    REQUIRE(pred_total >= 1.0 - 1e-9);
    REQUIRE(cell.tv >= 0.0);
    REQUIRE(cell.tv <= 1.0);
    REQUIRE(cell.threshold ==
            Catch::Approx(0.25 * config.horizon_t + cell.x));  // alpha* = 1/4
    REQUIRE(std::isfinite(cell.mean_z));
    REQUIRE(cell.exact_mean > 0.0);
  }
  // empirical means should be loosely near the exact ones at 3000 replicates
  for (const CountCell& cell : report.cells) REQUIRE(std::abs(cell.mean_z) < 5.0);
}

TEST_CASE("count experiment is deterministic across worker counts") {
  auto config = cheap_bd_config();
  config.replicates = 1500;
  const CountExperimentReport one = run_count_experiment(config);
  config.threads = 4;
  const CountExperimentReport four = run_count_experiment(config);
  REQUIRE(one.survival.survivors == four.survival.survivors);
  REQUIRE(one.cells.size() == four.cells.size());
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    REQUIRE(one.cells[i].empirical_pmf == four.cells[i].empirical_pmf);
    REQUIRE(one.cells[i].tv == four.cells[i].tv);
    REQUIRE(one.cells[i].mean_z == four.cells[i].mean_z);
    REQUIRE(one.cells[i].empirical_mean == four.cells[i].empirical_mean);
  }
}

TEST_CASE("length experiment report structure and orderings") {
  const auto config = cheap_bd_config();
  const LengthExperimentReport report = run_length_experiment(config);
  REQUIRE(report.cells.size() == 6);  // 3 classes x k in {1,2}

  const LengthCell* cells[3][2] = {};
  for (const LengthCell& cell : report.cells) {
    REQUIRE(cell.defined + cell.undefined == report.survival.survivors);
    REQUIRE(cell.grid_x.size() == cell.empirical_cdf.size());
    REQUIRE(cell.grid_x.size() == cell.predicted_cdf.size());
    for (std::size_t i = 1; i < cell.empirical_cdf.size(); ++i) {
      REQUIRE(cell.empirical_cdf[i] >= cell.empirical_cdf[i - 1]);
      REQUIRE(cell.predicted_cdf[i] >= cell.predicted_cdf[i - 1]);
    }
    REQUIRE(std::isfinite(cell.ks));
    cells[static_cast<int>(cell.edge_class)][cell.k - 1] = &cell;
  }

  // the longest of all edges dominates the longest interior edge, so its CDF
  // sits below pointwise; same for k=1 vs k=2 within a class
  for (int k = 1; k <= 2; ++k) {
    const LengthCell* interior = cells[1][k - 1];
    const LengthCell* all = cells[2][k - 1];
    REQUIRE(all->defined >= interior->defined);
    for (std::size_t i = 0; i < all->empirical_cdf.size(); ++i)
      REQUIRE(all->empirical_cdf[i] <= interior->empirical_cdf[i] + 1e-12);
  }
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < cells[c][0]->empirical_cdf.size(); ++i)
      REQUIRE(cells[c][1]->empirical_cdf[i] >= cells[c][0]->empirical_cdf[i] - 1e-12);
  }
}

TEST_CASE("length experiment is deterministic across worker counts") {
  auto config = cheap_bd_config();
  config.replicates = 1500;
  const LengthExperimentReport one = run_length_experiment(config);
  config.threads = 4;
  const LengthExperimentReport four = run_length_experiment(config);
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    REQUIRE(one.cells[i].ks == four.cells[i].ks);
    REQUIRE(one.cells[i].empirical_cdf == four.cells[i].empirical_cdf);
    REQUIRE(one.cells[i].defined == four.cells[i].defined);
  }
}

TEST_CASE("mixture and closed-form laws predict the same pmfs") {
  // Same birth-death config through both law paths; predicted tables must
  // agree within TV 0.01 per cell (martingale-limit sampling is the only
  // difference).
  auto closed = cheap_bd_config();
  closed.offsets_x = {0.0};
  closed.law = LawChoice::closed_form;
  auto mixed = closed;
  mixed.law = LawChoice::mixture;
  mixed.m_infty_horizon = 14.0;
  mixed.m_infty_samples = 100000;

  const CountExperimentReport a = run_count_experiment(closed);
  const CountExperimentReport b = run_count_experiment(mixed);
  REQUIRE(a.law_used == analytics::LimitLawKind::closed_form_birth_death);
  REQUIRE(b.law_used == analytics::LimitLawKind::empirical_mixture);
  REQUIRE(b.mixture_samples_used > 40000);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    REQUIRE(stats::tv_distance(a.cells[i].predicted_pmf, b.cells[i].predicted_pmf) <= 0.01);
    // identical simulations: empirical side is byte-identical
    REQUIRE(a.cells[i].empirical_pmf == b.cells[i].empirical_pmf);
  }
}

TEST_CASE("too few survivors aborts the experiment") {
  auto config = cheap_bd_config();
  config.model = ModelSpec::birth_death(0.52, 0.5);  // barely supercritical
  config.replicates = 150;
  config.offsets_x = {0.0};
  REQUIRE_THROWS_AS(run_count_experiment(config), TooFewSurvivorsError);
}

TEST_CASE("config validation rejects bad experiments") {
  {
    auto config = cheap_bd_config();
    config.replicates = 0;
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
    config.replicates = 99;
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.horizon_t = 80.0;  // e^{0.5 t} far beyond cap/10
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.offsets_x = {-3.0};  // l = 2.5 - 3.0 < 0
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.offsets_x = {0.0, 0.0};
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.ks = {2, 1};
    REQUIRE_THROWS_AS(run_length_experiment(config), std::invalid_argument);
    config.ks = {0};
    REQUIRE_THROWS_AS(run_length_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.model = ModelSpec::offspring_table(1.0, {{0, 0.25}, {2, 0.75}});
    config.law = LawChoice::closed_form;
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
    // mixture path without martingale parameters is rejected too
    config.law = LawChoice::automatic;
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
  {
    auto config = cheap_bd_config();
    config.model = ModelSpec::birth_death(1.0, 1.5);  // subcritical
    REQUIRE_THROWS_AS(run_count_experiment(config), std::invalid_argument);
  }
}

TEST_CASE("convergence diagnostic tracks the growth rate") {
  auto config = cheap_bd_config();
  config.model = ModelSpec::birth_death(1.0, 0.0);  // pure birth: all survive
  config.horizon_t = 8.0;
  config.replicates = 500;
  config.ks = {1};
  const std::vector<double> grid = {2.0, 4.0, 6.0, 8.0};
  const ConvergenceReport report = run_convergence_diagnostic(config, grid, 0.1);

  REQUIRE(report.cells.size() == 3);
  REQUIRE(report.survival.survivors == 500);
  for (const ConvergenceCell& cell : report.cells) {
    REQUIRE(cell.defined.size() == grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      REQUIRE(cell.defined[g] <= report.survival.survivors);
      if (cell.defined[g] > 0) {
        REQUIRE(cell.q50[g] <= cell.q90[g]);
        REQUIRE(cell.q90[g] <= cell.max_dev[g]);
        REQUIRE(cell.frac_within[g] >= 0.0);
        REQUIRE(cell.frac_within[g] <= 1.0);
      }
    }
    if (cell.edge_class == EdgeClass::pendant) {
      // a pendant edge grows at most at unit speed between snapshots
      REQUIRE(cell.max_pendant_increment_excess <= 1e-9);
    } else {
      REQUIRE(cell.monotonicity_violations == 0);
    }
  }
  // every pure-birth tree has a pendant edge at every positive time
  for (const ConvergenceCell& cell : report.cells) {
    if (cell.edge_class != EdgeClass::interior)
      for (std::size_t g = 0; g < grid.size(); ++g)
        REQUIRE(cell.defined[g] == report.survival.survivors);
  }
}

TEST_CASE("convergence diagnostic validates its grid") {
  auto config = cheap_bd_config();
  config.ks = {1};
  REQUIRE_THROWS_AS(run_convergence_diagnostic(config, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(run_convergence_diagnostic(config, {4.0, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(run_convergence_diagnostic(config, {2.0, 12.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(run_convergence_diagnostic(config, {0.0, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(run_convergence_diagnostic(config, {2.0, 4.0}, -1.0),
                    std::invalid_argument);
}
