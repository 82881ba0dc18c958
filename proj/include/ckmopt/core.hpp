#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckmopt {

/// Horizontal location in meters.
struct Position2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position2D&, const Position2D&) = default;
};

double distance(const Position2D& a, const Position2D& b);

/// Axis-aligned rectangle, used both as the UAV placement region and as
/// the footprint of a building.
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(const Position2D& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  Position2D clamp(const Position2D& p) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Regular lattice. Node (i, j) sits at (origin_x + i*spacing, origin_y + j*spacing).
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double spacing = 1.0;
  std::size_t nx = 2;
  std::size_t ny = 2;

  void validate() const;
  std::size_t size() const { return nx * ny; }
  std::size_t flat_index(std::size_t i, std::size_t j) const;
  Position2D node_position(std::size_t i, std::size_t j) const;
  Position2D node_position(std::size_t flat) const;
  Rect bounds() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Builds the lattice covering `region` at `spacing`; the region extent must be
/// an integer multiple of the spacing (within 1e-9 m).
GridSpec grid_for_region(const Rect& region, double spacing);

/// Channel gains in dB on a GridSpec, row-major with y as the slow axis.
class GainGrid {
 public:
  GainGrid(GridSpec spec, std::vector<double> gains_db);
  static GainGrid constant(const GridSpec& spec, double value_db);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return gains_db_; }

  /// Bounds-checked node access; throws std::out_of_range.
  double at(std::size_t i, std::size_t j) const;
  double operator[](std::size_t flat) const { return gains_db_[flat]; }

  friend bool operator==(const GainGrid&, const GainGrid&) = default;

 private:
  GridSpec spec_;
  std::vector<double> gains_db_;
};

struct ChannelSample {
  Position2D position;
  double gain_db = 0.0;

  friend bool operator==(const ChannelSample&, const ChannelSample&) = default;
};

/// System geometry and radio parameters for K UAV/GBS pairs.
struct Scenario {
  std::vector<Position2D> gbs_positions;
  double gbs_height = 2.0;
  double uav_altitude = 50.0;
  std::vector<double> tx_power_dbm;
  std::vector<double> noise_power_dbm;
  std::vector<double> rate_weights;
  Rect region;

  std::size_t num_links() const { return gbs_positions.size(); }
  void validate() const;
};

double dbm_to_watts(double p_dbm);
double db_to_linear(double g_db);
double linear_to_db(double ratio);

}  // namespace ckmopt
