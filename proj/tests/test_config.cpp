#include <cmath>

#include "blab/config.hpp"
#include "doctest.h"

using namespace blab;

TEST_CASE("config parse and round trip") {
  const std::string text = R"(
# experiment
alpha = 0.5
symbol = mollify:eps=0.05/truncate:r=0.9/sector
space.n = 48
space.radial_cap = 6
family.kind = mollified-truncation
family.M = 4
schedule.r0 = 0.5
schedule.ratio = 0.5
estimator.radii = 0.9, 0.95
estimator.caps = 8, 16, 24
search.max_iters = 150
search.tol = 1e-6
seed = 77
)";
  const ExperimentConfig cfg = ExperimentConfig::parse(text);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.n == 48);
  CHECK(cfg.family_m == 4);
  CHECK(cfg.radii.size() == 2);
  CHECK(cfg.caps == std::vector<int>{8, 16, 24});
  CHECK(cfg.seed == 77);

  // Serialize-parse round trip reproduces an equivalent config.
  const ExperimentConfig back = ExperimentConfig::parse(cfg.serialize());
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.symbol == cfg.symbol);
  CHECK(back.n == cfg.n);
  CHECK(back.fourier_cap == cfg.fourier_cap);
  CHECK(back.radial_cap == cfg.radial_cap);
  CHECK(back.family_kind == cfg.family_kind);
  CHECK(back.family_m == cfg.family_m);
  CHECK(back.schedule_r0 == cfg.schedule_r0);
  CHECK(back.schedule_ratio == cfg.schedule_ratio);
  CHECK(back.radii == cfg.radii);
  CHECK(back.caps == cfg.caps);
  CHECK(back.search_max_iters == cfg.search_max_iters);
  CHECK(back.search_tol == cfg.search_tol);
  CHECK(back.sot_vectors == cfg.sot_vectors);
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("config validation failures") {
  CHECK_THROWS_AS(ExperimentConfig::parse("alpha = -1.5"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("space.n = 0"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("schedule.r0 = 1.5"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("estimator.radii = 0.5, 1.2"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("unknown.key = 3"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("alpha == 0"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("alpha = zero"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("alpha = 0\nalpha = 1"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("operator.kind = banana"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("family.kind = banana"), ConfigError);
  CHECK_NOTHROW(ExperimentConfig::parse("alpha = 0  # comment"));
}

TEST_CASE("config derived values") {
  ExperimentConfig cfg;
  cfg.n = 64;
  CHECK(cfg.effective_fourier_cap() == 64 - 1 + 8);
  const auto caps = cfg.effective_caps();
  REQUIRE(caps.size() == 7);
  CHECK(caps.front() == 8);
  CHECK(caps.back() == 56);

  const auto sched = cfg.schedule(true);
  REQUIRE(sched.size() == static_cast<std::size_t>(cfg.family_m));
  CHECK(sched[0].first == doctest::Approx(0.5));
  CHECK(sched[0].second == doctest::Approx(0.25));
  CHECK(sched[2].first == doctest::Approx(0.875));
  // 1 - r_n > eps_n holds along the default schedule.
  for (const auto& [r, eps] : sched) CHECK(1.0 - r > eps);
}
