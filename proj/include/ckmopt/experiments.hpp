#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ckmopt/baselines.hpp"
#include "ckmopt/config.hpp"
#include "ckmopt/geostat.hpp"
#include "ckmopt/truth.hpp"

namespace ckmopt {

/// One synthetic city: building layout plus a truth CKM per GBS.
struct TruthWorld {
  BuildingLayout layout;
  std::vector<GainGrid> ckms;
};

/// Layout draws come from stream kLayout of `seed`; GBS k's shadowing from
/// kShadowing forked by k. Pass a sampler built for make_grid(config) to
/// skip the covariance factorization.
TruthWorld generate_world(const ExperimentConfig& config, std::uint64_t seed,
                          const GaussianFieldSampler* shadowing = nullptr);

GaussianFieldSampler make_shadowing_sampler(const ExperimentConfig& config);

/// Stride plan (stride_x, stride_y) or `n` random nodes drawn from
/// kSampling forked by (gbs, n).
std::vector<ChannelSample> plan_samples(const ExperimentConfig& config, const GainGrid& truth,
                                        std::size_t gbs, std::uint64_t seed);
std::vector<ChannelSample> random_samples(const GainGrid& truth, std::size_t n, std::size_t gbs,
                                          std::uint64_t seed);

/// Builds a CKM for GBS `gbs` from samples. Kriging fits its variogram to the
/// samples first; `fitted` receives the parameters when non-null.
GainGrid construct_with(const ExperimentConfig& config, MethodKind method,
                        std::span<const ChannelSample> samples, const GridSpec& spec,
                        std::size_t gbs, SemivariogramParams* fitted = nullptr);

struct MaeRow {
  std::size_t gbs = 0;  ///< 1-based
  MethodKind method = MethodKind::kKnn;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double mae = 0.0;

  friend bool operator==(const MaeRow&, const MaeRow&) = default;
};

/// Random-sampling construction error over mae_sample_counts x seeds x
/// mae_methods, all sharing the same sample set per (gbs, n, seed).
std::vector<MaeRow> mae_sweep(const ExperimentConfig& config, std::span<const GainGrid> truths,
                              std::span<const std::uint64_t> seeds);

void write_mae_csv(std::ostream& out, std::span<const MaeRow> rows);

/// DFO result with the placement scored on the planning CKMs and, when given,
/// on the truth CKMs.
struct PlacementOutcome {
  OptTrace trace;
  PlacementVector placement;
  RateReport planning;
  std::optional<RateReport> truth;
};

PlacementOutcome run_placement(const ExperimentConfig& config, std::span<const GainGrid> planning,
                               std::span<const GainGrid> truth, std::uint64_t seed);

void write_summary_json(std::ostream& out, const ExperimentConfig& config,
                        const PlacementOutcome& outcome);

enum class Scheme { kDfoTruth, kDfoKriging, kDfoKnn, kHovering, kLosDesign };
inline constexpr Scheme kAllSchemes[] = {Scheme::kDfoTruth, Scheme::kDfoKriging, Scheme::kDfoKnn,
                                         Scheme::kHovering, Scheme::kLosDesign};
const char* to_string(Scheme s);

struct SweepRow {
  double power_dbm = 0.0;
  Scheme scheme = Scheme::kHovering;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;  ///< evaluated on truth

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Sum rate on truth for every (seed, power, scheme). Kriging and KNN maps
/// come from the plan_stride sampling of each seed's truth.
std::vector<SweepRow> sweep_power(const ExperimentConfig& config,
                                  const GaussianFieldSampler* shadowing = nullptr);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

// CLI commands. Each writes into config.out_dir (created if missing) and
// prints a short report to `log`.
using Paths = std::vector<std::filesystem::path>;

void cmd_gen_truth(const ExperimentConfig& config, std::ostream& log);
void cmd_sample(const ExperimentConfig& config, const Paths& truth_files, std::ostream& log);
void cmd_construct(const ExperimentConfig& config, const Paths& truth_files,
                   const Paths& sample_files, bool sweep, std::ostream& log);
void cmd_eval_mae(const ExperimentConfig& config, const Paths& estimate_files,
                  const Paths& truth_files, std::ostream& log);
void cmd_optimize(const ExperimentConfig& config, const Paths& ckm_files, const Paths& truth_files,
                  std::ostream& log);
void cmd_exhaustive(const ExperimentConfig& config, const Paths& ckm_files, std::ostream& log);
void cmd_sweep_power(const ExperimentConfig& config, std::ostream& log);
void cmd_export_heatmap(const ExperimentConfig& config, const Paths& grid_files, std::ostream& log);

}  // namespace ckmopt
