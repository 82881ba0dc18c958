#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ckmopt/core.hpp"
#include "ckmopt/dfo.hpp"
#include "ckmopt/io.hpp"
#include "ckmopt/radio.hpp"
#include "ckmopt/truth.hpp"

namespace ckmopt {

enum class SamplingMode { kStride, kRandom };

/// Construction methods selectable from a config file.
enum class MethodKind { kKrigingExponential, kKrigingSpherical, kKnn, kLos };

const char* to_string(MethodKind m);
MethodKind parse_method(const std::string& name);

/// Everything a CLI command needs. Defaults reproduce the reference urban
/// scenario with two UAV/GBS pairs.
struct ExperimentConfig {
  // Scenario.
  std::vector<Position2D> gbs_positions{{-89.54, 16.30}, {-118.22, -53.86}};
  double gbs_height = 2.0;
  double uav_altitude = 50.0;
  double tx_power_dbm = 30.0;
  double noise_power_dbm = -100.0;
  std::vector<double> rate_weights;  ///< empty means all ones
  Rect region{-200.0, 100.0, -150.0, 150.0};
  double grid_spacing = 5.0;

  // Synthetic truth.
  TruthParams truth;
  std::size_t n_buildings = 12;
  LayoutOptions layout;

  // Measurement plan for `sample` / `construct`.
  SamplingMode sampling = SamplingMode::kStride;
  std::size_t stride_x = 15;  ///< 75 m along x at every y row
  std::size_t stride_y = 1;
  std::size_t sample_count = 300;

  // Measurement plan behind the CKMs used for placement in `sweep-power`.
  std::size_t plan_stride_x = 10;  ///< 50 m along x
  std::size_t plan_stride_y = 1;

  MethodKind method = MethodKind::kKrigingExponential;
  std::size_t knn_k = 5;
  std::size_t kriging_neighborhood = 0;  ///< 0 = all samples
  std::vector<std::size_t> mae_sample_counts{100, 300, 1000, 2000};
  std::vector<MethodKind> mae_methods{MethodKind::kKrigingExponential, MethodKind::kKnn};

  DfoConfig dfo;
  LookupMode lookup = LookupMode::kNearest;
  std::size_t exhaustive_stride = 1;

  std::vector<double> sweep_powers_dbm{20.0, 25.0, 30.0, 35.0, 40.0};
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  HeatmapRange heatmap;
  std::filesystem::path out_dir = "out";

  void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment. Unknown keys and bad
/// values raise ParseError with the line number.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>",
                              ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

Scenario make_scenario(const ExperimentConfig& config);
GridSpec make_grid(const ExperimentConfig& config);

}  // namespace ckmopt
