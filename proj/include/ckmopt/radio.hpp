#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ckmopt/core.hpp"

namespace ckmopt {

/// Concatenated UAV horizontal positions (x1, y1, ..., xK, yK).
class PlacementVector {
 public:
  PlacementVector() = default;
  explicit PlacementVector(Eigen::VectorXd coords);
  static PlacementVector from_positions(std::span<const Position2D> positions);

  std::size_t num_uavs() const { return static_cast<std::size_t>(coords_.size()) / 2; }
  Position2D uav(std::size_t k) const { return {coords_(2 * k), coords_(2 * k + 1)}; }
  std::vector<Position2D> positions() const;
  const Eigen::VectorXd& coords() const { return coords_; }

 private:
  Eigen::VectorXd coords_;
};

enum class LookupMode { kNearest, kBilinear };

/// CKM value at an arbitrary position, as a linear power ratio. Positions
/// outside the grid are clamped onto its boundary.
double lookup_gain(const GainGrid& ckm, const Position2D& p, LookupMode mode = LookupMode::kNearest);

/// Flat index of the node that nearest-mode lookup resolves `p` to.
std::size_t nearest_node(const GridSpec& spec, const Position2D& p);

/// Per-link breakdown of one placement.
struct RateReport {
  std::vector<double> sinr;
  std::vector<double> rate;  ///< bps/Hz
  double weighted_sum = 0.0;
};

/// SINR of link k from received powers: rx(k, j) is the power in watts that
/// GBS k receives from UAV j. Interference is summed in ascending j.
template <class Received>
double sinr_from_received(std::size_t num_links, std::size_t k, double noise_watts,
                          const Received& rx) {
  double interference = 0.0;
  for (std::size_t j = 0; j < num_links; ++j) {
    if (j != k) interference += rx(k, j);
  }
  return rx(k, k) / (interference + noise_watts);
}

template <class Received>
double weighted_sum_rate_from_received(std::span<const double> rate_weights,
                                       std::span<const double> noise_watts, const Received& rx) {
  const std::size_t n = rate_weights.size();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += rate_weights[k] * std::log2(1.0 + sinr_from_received(n, k, noise_watts[k], rx));
  }
  return total;
}

double sinr(const Scenario& scenario, std::span<const GainGrid> ckms, const PlacementVector& q,
            std::size_t k, LookupMode mode = LookupMode::kNearest);

double rate(const Scenario& scenario, std::span<const GainGrid> ckms, const PlacementVector& q,
            std::size_t k, LookupMode mode = LookupMode::kNearest);

double weighted_sum_rate(const Scenario& scenario, std::span<const GainGrid> ckms,
                         const PlacementVector& q, LookupMode mode = LookupMode::kNearest);

RateReport evaluate_placement(const Scenario& scenario, std::span<const GainGrid> ckms,
                              const PlacementVector& q, LookupMode mode = LookupMode::kNearest);

/// Received-power matrix rx(k, j) = P_j * Z_k(q_j) in watts.
Eigen::MatrixXd received_powers(const Scenario& scenario, std::span<const GainGrid> ckms,
                                const PlacementVector& q, LookupMode mode);

std::vector<double> noise_watts(const Scenario& scenario);

}  // namespace ckmopt
