#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "ckmopt/core.hpp"
#include "ckmopt/rng.hpp"

namespace ckmopt {

struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Building {
  Rect footprint;
  double height = 0.0;

  friend bool operator==(const Building&, const Building&) = default;
};

using BuildingLayout = std::vector<Building>;

struct LayoutOptions {
  double min_side = 15.0;
  double max_side = 40.0;
  double min_height = 10.0;
  double max_height = 45.0;
  /// Footprints never cover these points (GBS sites).
  std::vector<Position2D> keep_clear;
  std::size_t max_attempts_per_building = 2000;
};

/// Synthetic ground-truth parameters. Only beta0_db has a physical anchor
/// (gain at the 1 m reference distance); the rest are stand-in defaults.
struct TruthParams {
  double beta0_db = -30.0;
  double n_los = 2.2;
  double n_nlos = 3.5;
  double nlos_penalty_db = 20.0;
  double shadow_std_db = 4.0;
  double shadow_corr_len = 50.0;

  void validate() const;
};

/// Largest grid that gaussian_random_field will factorize densely.
inline constexpr std::size_t kMaxDenseFieldNodes = 10000;

/// Samples n pairwise-disjoint boxes inside `region`. Throws std::runtime_error
/// when a box cannot be placed within the attempt budget.
BuildingLayout generate_layout(const Rect& region, std::size_t n_buildings, SeededRng& rng,
                               const LayoutOptions& options = {});

/// True iff the segment tx-rx passes through some building below its roof.
bool los_blocked(const BuildingLayout& layout, const Point3D& tx, const Point3D& rx);

/// Zero-mean Gaussian field with exponential covariance
/// std^2 * exp(-|u - v| / corr_len), sampled as L * xi where L L^T is the
/// dense covariance. The factorization is done once per sampler.
class GaussianFieldSampler {
 public:
  GaussianFieldSampler(const GridSpec& spec, double std_db, double corr_len);

  GainGrid draw(SeededRng& rng) const;
  const GridSpec& spec() const { return spec_; }
  double std_db() const { return std_db_; }
  double corr_len() const { return corr_len_; }

 private:
  GridSpec spec_;
  double std_db_;
  double corr_len_;
  Eigen::MatrixXd lower_;  // empty when std_db == 0
};

GainGrid gaussian_random_field(const GridSpec& spec, double std_db, double corr_len,
                               SeededRng& rng);

/// Heights of the GBS antenna and of the UAV plane.
struct LinkGeometry {
  double gbs_height = 2.0;
  double uav_altitude = 50.0;
};

GainGrid generate_truth_ckm(const BuildingLayout& layout, const Position2D& gbs,
                            const LinkGeometry& geometry, const GridSpec& spec,
                            const TruthParams& params, SeededRng& rng);

/// Same as above, reusing a prebuilt shadowing sampler (must match spec and params).
GainGrid generate_truth_ckm(const BuildingLayout& layout, const Position2D& gbs,
                            const LinkGeometry& geometry, const TruthParams& params,
                            const GaussianFieldSampler& shadowing, SeededRng& rng);

/// Nodes with i % stride_x == 0 and j % stride_y == 0, row-major.
std::vector<ChannelSample> sample_measurements(const GainGrid& truth, std::size_t stride_x_nodes,
                                               std::size_t stride_y_nodes);

/// n distinct nodes drawn without replacement, returned in row-major order.
std::vector<ChannelSample> sample_random(const GainGrid& truth, std::size_t n, SeededRng& rng);

}  // namespace ckmopt
