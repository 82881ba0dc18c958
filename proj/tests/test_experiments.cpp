#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "ckmopt/experiments.hpp"

using namespace ckmopt;

namespace {

// 16 x 16 nodes so the whole pipeline runs in well under a second.
ExperimentConfig small_config() {
  ExperimentConfig c;
  c.region = {-100, 50, -75, 75};
  c.grid_spacing = 10;
  c.gbs_positions = {{-60, 10}, {-30, -40}};
  c.n_buildings = 4;
  c.stride_x = 3;
  c.plan_stride_x = 3;
  c.mae_sample_counts = {10, 20, 30, 40};
  c.seeds = {1, 2, 3};
  c.sweep_powers_dbm = {20, 30};
  c.dfo.max_iter = 60;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("world generation is deterministic and seed dependent") {
  const ExperimentConfig c = small_config();
  const TruthWorld a = generate_world(c, 7);
  const TruthWorld b = generate_world(c, 7);
  const TruthWorld other = generate_world(c, 8);
  CHECK(a.layout == b.layout);
  REQUIRE(a.ckms.size() == 2);
  CHECK(a.ckms == b.ckms);
  CHECK_FALSE(a.ckms[0] == other.ckms[0]);
  CHECK(a.layout.size() == 4);

  const GaussianFieldSampler sampler = make_shadowing_sampler(c);
  CHECK(generate_world(c, 7, &sampler).ckms == a.ckms);

  ExperimentConfig wrong = c;
  wrong.grid_spacing = 5;
  CHECK_THROWS(generate_world(wrong, 7, &sampler));
}

TEST_CASE("sampling plans") {
  ExperimentConfig c = small_config();
  const TruthWorld w = generate_world(c, 1);
  CHECK(plan_samples(c, w.ckms[0], 0, 1).size() == 6 * 16);
  c.sampling = SamplingMode::kRandom;
  c.sample_count = 25;
  const auto r = plan_samples(c, w.ckms[0], 0, 1);
  CHECK(r.size() == 25);
  CHECK(r == random_samples(w.ckms[0], 25, 0, 1));
  CHECK_FALSE(r == random_samples(w.ckms[0], 25, 1, 1));
}

TEST_CASE("construction from every node reproduces the truth") {
  const ExperimentConfig c = small_config();
  const TruthWorld w = generate_world(c, 2);
  const GridSpec spec = make_grid(c);
  const auto all = sample_measurements(w.ckms[0], 1, 1);
  REQUIRE(all.size() == spec.size());
  SemivariogramParams fitted;
  const GainGrid k = construct_with(c, MethodKind::kKrigingExponential, all, spec, 0, &fitted);
  CHECK(fitted.b > 0.0);
  // Exact interpolation holds for any fitted nugget since targets coincide with samples.
  CHECK(mae(k, w.ckms[0]) < 1e-6);
  CHECK(mae(construct_with(c, MethodKind::kKnn, all, spec, 0), w.ckms[0]) > 0.0);
  CHECK_THROWS(construct_with(c, MethodKind::kLos, all, spec, 5));
}

TEST_CASE("mae sweep layout") {
  const ExperimentConfig c = small_config();
  const GaussianFieldSampler sampler = make_shadowing_sampler(c);
  const TruthWorld w = generate_world(c, 1, &sampler);
  const auto rows = mae_sweep(c, w.ckms, c.seeds);
  CHECK(rows.size() == 2 * 4 * 3 * 2);
  for (const auto& r : rows) {
    CHECK(r.gbs >= 1);
    CHECK(r.gbs <= 2);
    CHECK(std::isfinite(r.mae));
    CHECK(r.mae >= 0.0);
  }
  CHECK(rows == mae_sweep(c, w.ckms, c.seeds));

  std::ostringstream out;
  write_mae_csv(out, rows);
  const std::string s = out.str();
  CHECK(s.rfind("gbs,method,n,seed,mae\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(rows.size() + 1));
}

TEST_CASE("placement outcome and summary") {
  ExperimentConfig c = small_config();
  const TruthWorld w = generate_world(c, 3);
  const PlacementOutcome o = run_placement(c, w.ckms, w.ckms, 3);
  REQUIRE(o.truth.has_value());
  CHECK(o.planning.weighted_sum == doctest::Approx(o.truth->weighted_sum));
  CHECK(o.trace.best_value == doctest::Approx(o.planning.weighted_sum));
  CHECK(o.planning.weighted_sum >= weighted_sum_rate(make_scenario(c), w.ckms,
                                                       hovering_baseline(make_scenario(c))));

  std::ostringstream out;
  c.seed = 3;
  write_summary_json(out, c, o);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["seed"] == 3);
  CHECK(j["num_uavs"] == 2);
  CHECK(j["evaluations"] == o.trace.evaluations);
  CHECK(j["uavs"].size() == 2);
  CHECK(j["uavs"][1]["x"].get<double>() == o.placement.uav(1).x);
  CHECK_FALSE(j.contains("wall_time"));

  const PlacementOutcome again = run_placement(c, w.ckms, {}, 3);
  CHECK(again.placement.coords() == o.placement.coords());
  CHECK_FALSE(again.truth.has_value());
  const std::vector<GainGrid> one{w.ckms[0]};
  CHECK_THROWS(run_placement(c, w.ckms, one, 3));
}

TEST_CASE("power sweep rows") {
  const ExperimentConfig c = small_config();
  const GaussianFieldSampler sampler = make_shadowing_sampler(c);
  const auto rows = sweep_power(c, &sampler);
  CHECK(rows.size() == 2 * 5 * 3);
  CHECK(rows == sweep_power(c, &sampler));
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.sum_rate));
    CHECK(r.sum_rate >= 0.0);
  }
  // Hovering ignores the rng, so it matches a direct evaluation.
  for (const auto& r : rows) {
    if (r.scheme != Scheme::kHovering) continue;
    ExperimentConfig at = c;
    at.tx_power_dbm = r.power_dbm;
    const Scenario s = make_scenario(at);
    const TruthWorld w = generate_world(c, r.seed, &sampler);
    CHECK(r.sum_rate == weighted_sum_rate(s, w.ckms, hovering_baseline(s)));
  }
  std::ostringstream out;
  write_sweep_csv(out, rows);
  CHECK(out.str().rfind("power_dbm,scheme,seed,sum_rate\n20,dfo-truth,1,", 0) == 0);
}

}
