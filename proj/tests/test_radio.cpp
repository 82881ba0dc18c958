#include <cmath>
#include <vector>

#include "doctest.h"

#include "ckmopt/radio.hpp"
#include "ckmopt/rng.hpp"

using namespace ckmopt;

namespace {

Scenario scenario_k(std::size_t k) {
  Scenario s;
  for (std::size_t i = 0; i < k; ++i) {
    s.gbs_positions.push_back({10.0 * i, 0.0});
    s.tx_power_dbm.push_back(30.0);
    s.noise_power_dbm.push_back(-100.0);
    s.rate_weights.push_back(1.0);
  }
  s.region = {0, 40, 0, 40};
  return s;
}

GainGrid random_grid(const GridSpec& spec, SeededRng& r) {
  std::vector<double> v(spec.size());
  for (auto& x : v) x = r.uniform(-120, -50);
  return GainGrid(spec, v);
}

}  // namespace

TEST_SUITE("radio") {

TEST_CASE("placement vector") {
  const std::vector<Position2D> p{{1, 2}, {3, 4}};
  const PlacementVector q = PlacementVector::from_positions(p);
  CHECK(q.num_uavs() == 2);
  CHECK(q.uav(1) == Position2D{3, 4});
  CHECK(q.positions() == p);
  CHECK_THROWS(PlacementVector(Eigen::VectorXd::Zero(3)));
}

TEST_CASE("gain lookup") {
  const GridSpec spec{0, 0, 5, 3, 3};
  const GainGrid g(spec, {-60, -70, -80, -65, -75, -85, -90, -95, -100});
  CHECK(lookup_gain(g, {5, 5}, LookupMode::kNearest) == doctest::Approx(db_to_linear(-75)));
  CHECK(lookup_gain(g, {5, 5}, LookupMode::kBilinear) == doctest::Approx(db_to_linear(-75)));
  CHECK(lookup_gain(g, {6.9, 3.6}, LookupMode::kNearest) == doctest::Approx(db_to_linear(-75)));
  CHECK(lookup_gain(g, {2.5, 2.5}, LookupMode::kBilinear) ==
        doctest::Approx(db_to_linear((-60 - 70 - 65 - 75) / 4.0)));
  // Clamped onto the boundary.
  CHECK(lookup_gain(g, {-40, -3}, LookupMode::kNearest) == doctest::Approx(db_to_linear(-60)));
  CHECK(lookup_gain(g, {10.0000001, 10}, LookupMode::kBilinear) == doctest::Approx(db_to_linear(-100)));
  CHECK(nearest_node(spec, {7.4, 2.4}) == 1);
  CHECK_THROWS(lookup_gain(g, {NAN, 0}));
}

TEST_CASE("sinr and rate hand values") {
  const Scenario s1 = scenario_k(1);
  const GridSpec spec{0, 0, 5, 9, 9};
  const std::vector<GainGrid> one{GainGrid::constant(spec, -60.0)};
  const PlacementVector q1 = PlacementVector::from_positions(std::vector<Position2D>{{5, 5}});
  CHECK(sinr(s1, one, q1, 0) == doctest::Approx(1e7).epsilon(1e-12));
  CHECK(rate(s1, one, q1, 0) == doctest::Approx(23.2535).epsilon(1e-3 / 23.2535));
  CHECK(weighted_sum_rate(s1, one, q1) == doctest::Approx(rate(s1, one, q1, 0)));

  // Equal desired and interfering gains, noise negligible.
  Scenario s2 = scenario_k(2);
  s2.noise_power_dbm = {-300, -300};
  const std::vector<GainGrid> both{GainGrid::constant(spec, -70.0), GainGrid::constant(spec, -70.0)};
  const PlacementVector q2 = PlacementVector::from_positions(std::vector<Position2D>{{0, 0}, {20, 20}});
  CHECK(sinr(s2, both, q2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rate(s2, both, q2, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // Vanishing interference reduces to the single-link case.
  std::vector<double> v(spec.size(), -60.0);
  v[spec.flat_index(8, 8)] = -400.0;
  const std::vector<GainGrid> shielded{GainGrid(spec, v), GainGrid::constant(spec, -60.0)};
  const PlacementVector q3 = PlacementVector::from_positions(std::vector<Position2D>{{0, 0}, {40, 40}});
  CHECK(sinr(scenario_k(2), shielded, q3, 0) == doctest::Approx(1e7).epsilon(1e-9));
}

TEST_CASE("rates from sinr and weighted sums") {
  const std::vector<double> noise{1.0, 1.0};
  auto rates_to_rx = [](double r1, double r2) {
    Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(2, 2);
    rx(0, 0) = std::exp2(r1) - 1.0;
    rx(1, 1) = std::exp2(r2) - 1.0;
    return rx;
  };
  const std::vector<double> ones{1.0, 1.0};
  CHECK(weighted_sum_rate_from_received(ones, noise, rates_to_rx(13.572, 14.629)) ==
        doctest::Approx(28.201).epsilon(1e-12));
  const std::vector<double> w{2.0, 0.5};
  CHECK(weighted_sum_rate_from_received(w, noise, rates_to_rx(1.0, 2.0)) == doctest::Approx(3.0));
  const Eigen::MatrixXd three = rates_to_rx(2.0, 0.0);
  CHECK(sinr_from_received(2, 0, 1.0, three) == doctest::Approx(3.0));
}

TEST_CASE("rate monotonicity") {
  const GridSpec spec{0, 0, 10, 5, 5};
  SeededRng r(1, Stream::kTest);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd rx(3, 3);
    for (int i = 0; i < 9; ++i) rx(i / 3, i % 3) = r.uniform(1e-12, 1e-6);
    const std::vector<double> noise{1e-13, 1e-13, 1e-13};
    const double base = sinr_from_received(3, 0, noise[0], rx);
    Eigen::MatrixXd up = rx;
    up(0, 0) *= 1.5;
    CHECK(sinr_from_received(3, 0, noise[0], up) > base);
    Eigen::MatrixXd worse = rx;
    worse(0, 1 + t % 2) *= 1.5;
    CHECK(sinr_from_received(3, 0, noise[0], worse) < base);
    CHECK(base >= 0.0);
  }
}

TEST_CASE("nearest lookup makes the objective piecewise constant") {
  const GridSpec spec{0, 0, 10, 5, 5};
  SeededRng r(2, Stream::kTest);
  const std::vector<GainGrid> ckms{random_grid(spec, r), random_grid(spec, r)};
  const Scenario s = scenario_k(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t a = r.below(spec.size());
    const std::size_t b = r.below(spec.size());
    const Position2D pa = spec.node_position(a);
    const Position2D pb = spec.node_position(b);
    const double at_nodes = weighted_sum_rate(s, ckms, PlacementVector::from_positions(std::vector<Position2D>{pa, pb}));
    const Position2D na{pa.x + r.uniform(-4.9, 4.9) * (pa.x > 0 && pa.x < 40), pa.y};
    const Position2D nb{pb.x, pb.y + r.uniform(-4.9, 4.9) * (pb.y > 0 && pb.y < 40)};
    CHECK(weighted_sum_rate(s, ckms, PlacementVector::from_positions(std::vector<Position2D>{na, nb})) == at_nodes);
  }
}

TEST_CASE("scaling the weights scales the objective") {
  const GridSpec spec{0, 0, 10, 5, 5};
  SeededRng r(3, Stream::kTest);
  const std::vector<GainGrid> ckms{random_grid(spec, r), random_grid(spec, r)};
  Scenario s = scenario_k(2);
  s.rate_weights = {1.0, 0.25};
  Scenario scaled = s;
  scaled.rate_weights = {3.0, 0.75};
  for (int t = 0; t < 20; ++t) {
    const PlacementVector q = PlacementVector::from_positions(
        std::vector<Position2D>{{r.uniform(0, 40), r.uniform(0, 40)}, {r.uniform(0, 40), r.uniform(0, 40)}});
    CHECK(weighted_sum_rate(scaled, ckms, q) == doctest::Approx(3.0 * weighted_sum_rate(s, ckms, q)).epsilon(1e-14));
  }
}

TEST_CASE("evaluate_placement report") {
  const GridSpec spec{0, 0, 10, 5, 5};
  SeededRng r(4, Stream::kTest);
  const std::vector<GainGrid> ckms{random_grid(spec, r), random_grid(spec, r), random_grid(spec, r)};
  const Scenario s = scenario_k(3);
  const PlacementVector q = PlacementVector::from_positions(std::vector<Position2D>{{3, 8}, {22, 30}, {40, 1}});
  const RateReport rep = evaluate_placement(s, ckms, q);
  REQUIRE(rep.rate.size() == 3);
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(rep.sinr[k] == doctest::Approx(sinr(s, ckms, q, k)));
    CHECK(rep.rate[k] == doctest::Approx(std::log2(1.0 + rep.sinr[k])));
    sum += rep.rate[k];
  }
  CHECK(rep.weighted_sum == doctest::Approx(sum));
  CHECK_THROWS(weighted_sum_rate(s, std::vector<GainGrid>{ckms[0]}, q));
  CHECK_THROWS(sinr(s, ckms, q, 3));
}

}
