#include "ckmopt/core.hpp"

#include <algorithm>
#include <cmath>

namespace ckmopt {

double distance(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Position2D Rect::clamp(const Position2D& p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

void GridSpec::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("GridSpec: spacing must be positive");
  }
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("GridSpec: need at least 2 nodes per axis");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw std::invalid_argument("GridSpec: origin must be finite");
  }
}

std::size_t GridSpec::flat_index(std::size_t i, std::size_t j) const {
  if (i >= nx || j >= ny) {
    throw std::out_of_range("GridSpec: node (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") outside " + std::to_string(nx) +
                            "x" + std::to_string(ny) + " grid");
  }
  return j * nx + i;
}

Position2D GridSpec::node_position(std::size_t i, std::size_t j) const {
  return {origin_x + static_cast<double>(i) * spacing,
          origin_y + static_cast<double>(j) * spacing};
}

Position2D GridSpec::node_position(std::size_t flat) const {
  return node_position(flat % nx, flat / nx);
}

Rect GridSpec::bounds() const {
  return {origin_x, origin_x + static_cast<double>(nx - 1) * spacing, origin_y,
          origin_y + static_cast<double>(ny - 1) * spacing};
}

GridSpec grid_for_region(const Rect& region, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid_for_region: spacing must be positive");
  auto cells = [&](double extent) {
    const double n = extent / spacing;
    const double r = std::round(n);
    if (std::abs(n - r) * spacing > 1e-9 || r < 1.0) {
      throw std::invalid_argument("grid_for_region: region extent is not a multiple of the spacing");
    }
    return static_cast<std::size_t>(r) + 1;
  };
  GridSpec spec{region.x_min, region.y_min, spacing, cells(region.width()), cells(region.height())};
  spec.validate();
  return spec;
}

GainGrid::GainGrid(GridSpec spec, std::vector<double> gains_db)
    : spec_(spec), gains_db_(std::move(gains_db)) {
  spec_.validate();
  if (gains_db_.size() != spec_.size()) {
    throw std::invalid_argument("GainGrid: expected " + std::to_string(spec_.size()) +
                                " values, got " + std::to_string(gains_db_.size()));
  }
  for (double g : gains_db_) {
    if (!std::isfinite(g)) throw std::invalid_argument("GainGrid: non-finite gain");
  }
}

GainGrid GainGrid::constant(const GridSpec& spec, double value_db) {
  return GainGrid(spec, std::vector<double>(spec.size(), value_db));
}

double GainGrid::at(std::size_t i, std::size_t j) const {
  return gains_db_[spec_.flat_index(i, j)];
}

void Scenario::validate() const {
  const std::size_t k = gbs_positions.size();
  if (k == 0) throw std::invalid_argument("Scenario: need at least one GBS");
  if (tx_power_dbm.size() != k || noise_power_dbm.size() != k || rate_weights.size() != k) {
    throw std::invalid_argument("Scenario: per-link lists must all have length K = " +
                                std::to_string(k));
  }
  for (double a : rate_weights) {
    if (!(a > 0.0)) throw std::invalid_argument("Scenario: rate weights must be positive");
  }
  if (!(uav_altitude > gbs_height)) {
    throw std::invalid_argument("Scenario: UAV altitude must exceed GBS height");
  }
  if (!(region.width() > 0.0) || !(region.height() > 0.0)) {
    throw std::invalid_argument("Scenario: placement region must have positive area");
  }
}

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double db_to_linear(double g_db) { return std::pow(10.0, g_db / 10.0); }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace ckmopt
