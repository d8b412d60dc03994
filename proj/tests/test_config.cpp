#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "gwedge/config.hpp"

using namespace gwedge;
using namespace gwedge::harness;
using io::format_config;
using io::parse_config_text;

namespace {

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.model.kind == b.model.kind && a.model.lambda == b.model.lambda &&
         a.model.mu == b.model.mu && a.model.beta == b.model.beta &&
         a.model.table == b.model.table && a.model.cutoff == b.model.cutoff &&
         a.horizon_t == b.horizon_t && a.offsets_x == b.offsets_x && a.ks == b.ks &&
         a.replicates == b.replicates && a.master_seed == b.master_seed &&
         a.particle_cap == b.particle_cap && a.m_infty_horizon == b.m_infty_horizon &&
         a.m_infty_samples == b.m_infty_samples && a.law == b.law &&
         a.threads == b.threads && a.tv_threshold == b.tv_threshold &&
         a.ks_threshold == b.ks_threshold && a.z_threshold == b.z_threshold;
}

}  // namespace

TEST_CASE("parse a full birth-death config") {
  const std::string text = R"(
# experiment description
[model]
kind = birth_death
lambda = 1.0
mu = 0.5

[experiment]
horizon = 16.0
offsets = -0.5, 0.0, 0.5
ks = 1, 2
replicates = 20000
seed = 1
particle_cap = 10000000
law = auto
threads = 2

[martingale]
horizon = 14.0
samples = 100000

[thresholds]
tv = 0.03
ks = 0.03
z = 3.0
)";
  const ExperimentConfig config = parse_config_text(text);
  REQUIRE(config.model.kind == ModelSpec::Kind::birth_death);
  REQUIRE(config.model.lambda == 1.0);
  REQUIRE(config.model.mu == 0.5);
  REQUIRE(config.horizon_t == 16.0);
  REQUIRE(config.offsets_x == std::vector<double>{-0.5, 0.0, 0.5});
  REQUIRE(config.ks == std::vector<int>{1, 2});
  REQUIRE(config.replicates == 20000);
  REQUIRE(config.master_seed == 1);
  REQUIRE(config.law == LawChoice::automatic);
  REQUIRE(config.threads == 2);
  REQUIRE(config.m_infty_horizon == 14.0);
  REQUIRE(config.m_infty_samples == 100000);
  REQUIRE(config.tv_threshold == 0.03);
}

TEST_CASE("parse table and zeta3 models") {
  const ExperimentConfig table = parse_config_text(R"(
[model]
kind = table
beta = 1.5
probs = 0:0.25, 2:0.5, 3:0.25
[experiment]
horizon = 8
replicates = 1000
seed = 9
)");
  REQUIRE(table.model.kind == ModelSpec::Kind::table);
  REQUIRE(table.model.beta == 1.5);
  REQUIRE(table.model.table ==
          std::map<int, double>{{0, 0.25}, {2, 0.5}, {3, 0.25}});

  const ExperimentConfig zeta = parse_config_text(R"(
[model]
kind = zeta3
beta = 1
cutoff = 10000
[experiment]
horizon = 20
replicates = 10000
seed = 5
law = mixture
)");
  REQUIRE(zeta.model.kind == ModelSpec::Kind::zeta3);
  REQUIRE(zeta.model.cutoff == 10000);
  REQUIRE(zeta.law == LawChoice::mixture);
}

TEST_CASE("formatted configs parse back identically") {
  ExperimentConfig config;
  config.model = ModelSpec::birth_death(1.0, 0.5);
  config.horizon_t = 16.25;
  config.offsets_x = {-0.5, 0.0, 1.0 / 3.0};  // exercises exact double printing
  config.ks = {1, 2, 5};
  config.replicates = 20000;
  config.master_seed = 0xDEADBEEF;
  config.particle_cap = 5000000;
  config.m_infty_horizon = 14.0;
  config.m_infty_samples = 50000;
  config.law = LawChoice::mixture;
  config.threads = 8;
  config.tv_threshold = 0.025;
  config.ks_threshold = 0.03;
  config.z_threshold = 3.5;
  REQUIRE(same_config(parse_config_text(format_config(config)), config));

  ExperimentConfig table;
  table.model = ModelSpec::offspring_table(0.7, {{0, 0.1}, {2, 0.2}, {7, 0.7}});
  table.horizon_t = 5.5;
  table.replicates = 500;
  table.master_seed = 3;
  REQUIRE(same_config(parse_config_text(format_config(table)), table));

  ExperimentConfig zeta;
  zeta.model = ModelSpec::zeta3(1.0, 10000);
  zeta.horizon_t = 20.0;
  zeta.replicates = 10000;
  zeta.master_seed = 7;
  zeta.m_infty_horizon = 20.0;
  zeta.m_infty_samples = 100000;
  REQUIRE(same_config(parse_config_text(format_config(zeta)), zeta));

  // a second round trip is a fixed point textually as well
  const std::string once = format_config(config);
  REQUIRE(format_config(parse_config_text(once)) == once);
}

TEST_CASE("parser rejects malformed input") {
  const std::string valid_tail = R"(
[experiment]
horizon = 8
replicates = 1000
seed = 1
)";
  // unknown section
  REQUIRE_THROWS_AS(parse_config_text("[mystery]\nx = 1\n" + valid_tail),
                    std::invalid_argument);
  // unknown keys
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = birth_death\nlambda = 1\nrate = 2\n" + valid_tail),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = birth_death\n[experiment]\nhorizon = 8\nreplicates "
                        "= 1000\nseed = 1\nworkers = 4\n"),
      std::invalid_argument);
  // duplicate key
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = birth_death\nlambda = 1\nlambda = 2\n" + valid_tail),
      std::invalid_argument);
  // key before any section
  REQUIRE_THROWS_AS(parse_config_text("kind = birth_death\n" + valid_tail),
                    std::invalid_argument);
  // missing required fields
  REQUIRE_THROWS_AS(parse_config_text("[model]\nkind = birth_death\n"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = birth_death\n[experiment]\nhorizon = 8\nseed = 1\n"),
      std::invalid_argument);
  // value garbage
  REQUIRE_THROWS_AS(parse_config_text("[model]\nkind = birth_death\nlambda = fast\n" +
                                      valid_tail),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = wiener\n" + valid_tail), std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = table\nbeta = 1\nprobs = 0:0.5, 0:0.5\n" + valid_tail),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_config_text("[model]\nkind = table\nbeta = 1\nprobs = 2 0.5\n" + valid_tail),
      std::invalid_argument);
  // malformed section header
  REQUIRE_THROWS_AS(parse_config_text("[model\nkind = birth_death\n" + valid_tail),
                    std::invalid_argument);
  // missing '='
  REQUIRE_THROWS_AS(parse_config_text("[model]\nkind birth_death\n" + valid_tail),
                    std::invalid_argument);
}

TEST_CASE("comments and whitespace are tolerated") {
  const ExperimentConfig config = parse_config_text(
      "  [model]  # the model\n"
      "  kind = birth_death  # binary splitting\n"
      "lambda=2\n"
      "\tmu\t=\t0.25\n"
      "[experiment]\n"
      "horizon = 4 # short\n"
      "replicates = 200\n"
      "seed = 77\n");
  REQUIRE(config.model.lambda == 2.0);
  REQUIRE(config.model.mu == 0.25);
  REQUIRE(config.horizon_t == 4.0);
  REQUIRE(config.master_seed == 77);
}

TEST_CASE("load_config_file reports missing files") {
  REQUIRE_THROWS_AS(io::load_config_file("/nonexistent/path/config.ini"),
                    std::invalid_argument);
}
