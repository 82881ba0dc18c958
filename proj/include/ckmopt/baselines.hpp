#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ckmopt/core.hpp"
#include "ckmopt/dfo.hpp"
#include "ckmopt/radio.hpp"
#include "ckmopt/rng.hpp"

namespace ckmopt {

/// Objective of the placement problem: weighted sum rate looked up on `ckms`.
/// The returned callable references scenario and ckms; keep them alive.
Objective placement_objective(const Scenario& scenario, std::span<const GainGrid> ckms,
                              LookupMode mode = LookupMode::kNearest);

/// Runs the trust-region optimizer on the CKM objective. Starts from the
/// hovering placement (clamped into the region) unless q0 is given.
OptTrace optimize_placement(const Scenario& scenario, std::span<const GainGrid> ckms,
                            const DfoConfig& config, SeededRng& rng,
                            LookupMode mode = LookupMode::kNearest,
                            std::optional<PlacementVector> q0 = std::nullopt);

/// Candidate lattice for exhaustive search: every `stride`-th CKM node per axis.
struct GridSearchConfig {
  std::size_t stride = 1;
};

inline constexpr double kExhaustiveBudget = 1e8;

struct SearchResult {
  PlacementVector placement;
  double objective = 0.0;
  std::size_t evaluations = 0;
};

/// Evaluates every K-tuple of candidate nodes; the first maximum in
/// lexicographic tuple order (UAV 1 most significant) wins ties.
SearchResult exhaustive_search(const Scenario& scenario, std::span<const GainGrid> ckms,
                               const GridSearchConfig& config = {});

/// q_k = w_k.
PlacementVector hovering_baseline(const Scenario& scenario);

/// Moves every UAV onto its nearest grid node.
PlacementVector snap_to_grid(const PlacementVector& q, const GridSpec& spec);

/// Analytic LoS gain beta0 / (|q - w_k|^2 + (H - H_gbs)^2), linear.
double los_gain(const Scenario& scenario, std::size_t k, const Position2D& q, double beta0_db);

/// Weighted sum rate under the analytic LoS channel.
double los_weighted_sum_rate(const Scenario& scenario, const PlacementVector& q, double beta0_db);

/// Placement designed on the LoS model with the same trust-region engine,
/// started from the hovering placement. Evaluate it on truth CKMs separately.
PlacementVector los_design(const Scenario& scenario, double beta0_db, const DfoConfig& config,
                           SeededRng& rng, OptTrace* trace = nullptr);

}  // namespace ckmopt
