#include "ckmopt/radio.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ckmopt {

PlacementVector::PlacementVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() % 2 != 0) {
    throw std::invalid_argument("PlacementVector: dimension must be even");
  }
}

PlacementVector PlacementVector::from_positions(std::span<const Position2D> positions) {
  Eigen::VectorXd c(2 * static_cast<Eigen::Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    c(2 * k) = positions[k].x;
    c(2 * k + 1) = positions[k].y;
  }
  return PlacementVector(std::move(c));
}

std::vector<Position2D> PlacementVector::positions() const {
  std::vector<Position2D> out;
  for (std::size_t k = 0; k < num_uavs(); ++k) out.push_back(uav(k));
  return out;
}

namespace {

// Continuous lattice coordinates of p after clamping onto the grid.
std::pair<double, double> lattice_coords(const GridSpec& spec, const Position2D& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument("lookup_gain: non-finite position");
  }
  const Position2D c = spec.bounds().clamp(p);
  const double u = std::clamp((c.x - spec.origin_x) / spec.spacing, 0.0,
                              static_cast<double>(spec.nx - 1));
  const double v = std::clamp((c.y - spec.origin_y) / spec.spacing, 0.0,
                              static_cast<double>(spec.ny - 1));
  return {u, v};
}

}  // namespace

std::size_t nearest_node(const GridSpec& spec, const Position2D& p) {
  const auto [u, v] = lattice_coords(spec, p);
  return spec.flat_index(static_cast<std::size_t>(std::round(u)),
                         static_cast<std::size_t>(std::round(v)));
}

double lookup_gain(const GainGrid& ckm, const Position2D& p, LookupMode mode) {
  const GridSpec& spec = ckm.spec();
  if (mode == LookupMode::kNearest) return db_to_linear(ckm[nearest_node(spec, p)]);

  const auto [u, v] = lattice_coords(spec, p);
  const auto i0 = std::min(static_cast<std::size_t>(u), spec.nx - 2);
  const auto j0 = std::min(static_cast<std::size_t>(v), spec.ny - 2);
  const double fu = u - static_cast<double>(i0);
  const double fv = v - static_cast<double>(j0);
  const double g00 = ckm.at(i0, j0);
  const double g10 = ckm.at(i0 + 1, j0);
  const double g01 = ckm.at(i0, j0 + 1);
  const double g11 = ckm.at(i0 + 1, j0 + 1);
  const double g = (1 - fu) * (1 - fv) * g00 + fu * (1 - fv) * g10 + (1 - fu) * fv * g01 +
                   fu * fv * g11;
  return db_to_linear(g);
}

std::vector<double> noise_watts(const Scenario& scenario) {
  std::vector<double> out;
  for (double n : scenario.noise_power_dbm) out.push_back(dbm_to_watts(n));
  return out;
}

Eigen::MatrixXd received_powers(const Scenario& scenario, std::span<const GainGrid> ckms,
                                const PlacementVector& q, LookupMode mode) {
  const std::size_t n = scenario.num_links();
  if (ckms.size() != n) {
    throw std::invalid_argument("radio: expected " + std::to_string(n) + " CKMs, got " +
                                std::to_string(ckms.size()));
  }
  if (q.num_uavs() != n) {
    throw std::invalid_argument("radio: placement has " + std::to_string(q.num_uavs()) +
                                " UAVs, scenario has " + std::to_string(n));
  }
  Eigen::MatrixXd rx(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = dbm_to_watts(scenario.tx_power_dbm[j]);
    const Position2D pos = q.uav(j);
    for (std::size_t k = 0; k < n; ++k) {
      const double g = lookup_gain(ckms[k], pos, mode);
      if (!std::isfinite(g)) throw std::runtime_error("radio: non-finite channel gain");
      rx(k, j) = p * g;
    }
  }
  return rx;
}

double sinr(const Scenario& scenario, std::span<const GainGrid> ckms, const PlacementVector& q,
            std::size_t k, LookupMode mode) {
  if (k >= scenario.num_links()) throw std::out_of_range("sinr: link index out of range");
  const Eigen::MatrixXd rx = received_powers(scenario, ckms, q, mode);
  return sinr_from_received(scenario.num_links(), k, dbm_to_watts(scenario.noise_power_dbm[k]),
                            rx);
}

double rate(const Scenario& scenario, std::span<const GainGrid> ckms, const PlacementVector& q,
            std::size_t k, LookupMode mode) {
  return std::log2(1.0 + sinr(scenario, ckms, q, k, mode));
}

double weighted_sum_rate(const Scenario& scenario, std::span<const GainGrid> ckms,
                         const PlacementVector& q, LookupMode mode) {
  const Eigen::MatrixXd rx = received_powers(scenario, ckms, q, mode);
  const std::vector<double> noise = noise_watts(scenario);
  return weighted_sum_rate_from_received(scenario.rate_weights, noise, rx);
}

RateReport evaluate_placement(const Scenario& scenario, std::span<const GainGrid> ckms,
                              const PlacementVector& q, LookupMode mode) {
  const Eigen::MatrixXd rx = received_powers(scenario, ckms, q, mode);
  const std::vector<double> noise = noise_watts(scenario);
  RateReport report;
  const std::size_t n = scenario.num_links();
  for (std::size_t k = 0; k < n; ++k) {
    const double s = sinr_from_received(n, k, noise[k], rx);
    report.sinr.push_back(s);
    report.rate.push_back(std::log2(1.0 + s));
  }
  report.weighted_sum = weighted_sum_rate_from_received(scenario.rate_weights, noise, rx);
  return report;
}

}  // namespace ckmopt
