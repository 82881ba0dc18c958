#include "ckmopt/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckmopt {

Objective placement_objective(const Scenario& scenario, std::span<const GainGrid> ckms,
                              LookupMode mode) {
  scenario.validate();
  if (ckms.size() != scenario.num_links()) {
    throw std::invalid_argument("placement_objective: expected " +
                                std::to_string(scenario.num_links()) + " CKMs, got " +
                                std::to_string(ckms.size()));
  }
  return [&scenario, ckms, mode](const Eigen::VectorXd& x) {
    return weighted_sum_rate(scenario, ckms, PlacementVector(x), mode);
  };
}

OptTrace optimize_placement(const Scenario& scenario, std::span<const GainGrid> ckms,
                            const DfoConfig& config, SeededRng& rng, LookupMode mode,
                            std::optional<PlacementVector> q0) {
  const Objective f = placement_objective(scenario, ckms, mode);
  const Box box = Box::from_region(scenario.region, scenario.num_links());
  const Eigen::VectorXd start = box.clamp(q0 ? q0->coords() : hovering_baseline(scenario).coords());
  return optimize(f, box, start, config, rng);
}

SearchResult exhaustive_search(const Scenario& scenario, std::span<const GainGrid> ckms,
                               const GridSearchConfig& config) {
  scenario.validate();
  const std::size_t n_links = scenario.num_links();
  if (ckms.size() != n_links) {
    throw std::invalid_argument("exhaustive_search: expected " + std::to_string(n_links) +
                                " CKMs, got " + std::to_string(ckms.size()));
  }
  if (config.stride < 1) throw std::invalid_argument("exhaustive_search: stride must be >= 1");
  const GridSpec& spec = ckms[0].spec();
  for (const auto& g : ckms) {
    if (!(g.spec() == spec)) throw std::invalid_argument("exhaustive_search: CKM grids differ");
  }

  std::vector<std::size_t> nodes;
  for (std::size_t j = 0; j < spec.ny; j += config.stride) {
    for (std::size_t i = 0; i < spec.nx; i += config.stride) nodes.push_back(spec.flat_index(i, j));
  }
  const std::size_t c = nodes.size();
  const double total = std::pow(static_cast<double>(c), static_cast<double>(n_links));
  if (total > kExhaustiveBudget) {
    throw std::invalid_argument("exhaustive_search: " + std::to_string(c) + "^" +
                                std::to_string(n_links) +
                                " evaluations exceed the budget of 1e8; use a larger stride");
  }

  // table[(k * K + j) * C + a] = P_j * Z_k(candidate a), matching received_powers().
  std::vector<double> table(n_links * n_links * c);
  for (std::size_t j = 0; j < n_links; ++j) {
    const double p = dbm_to_watts(scenario.tx_power_dbm[j]);
    for (std::size_t k = 0; k < n_links; ++k) {
      for (std::size_t a = 0; a < c; ++a) {
        table[(k * n_links + j) * c + a] = p * db_to_linear(ckms[k][nodes[a]]);
      }
    }
  }
  const std::vector<double> noise = noise_watts(scenario);

  std::vector<std::size_t> idx(n_links, 0);
  auto rx = [&](std::size_t k, std::size_t j) { return table[(k * n_links + j) * c + idx[j]]; };
  std::vector<std::size_t> best_idx = idx;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  while (true) {
    const double v = weighted_sum_rate_from_received(scenario.rate_weights, noise, rx);
    ++evaluations;
    if (v > best) {
      best = v;
      best_idx = idx;
    }
    std::size_t pos = n_links;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < c) break;
      idx[pos] = 0;
      if (pos == 0) {
        pos = n_links + 1;
        break;
      }
    }
    if (pos == n_links + 1) break;
  }

  std::vector<Position2D> placement;
  for (std::size_t j = 0; j < n_links; ++j) placement.push_back(spec.node_position(nodes[best_idx[j]]));
  return {PlacementVector::from_positions(placement), best, evaluations};
}

PlacementVector hovering_baseline(const Scenario& scenario) {
  return PlacementVector::from_positions(scenario.gbs_positions);
}

PlacementVector snap_to_grid(const PlacementVector& q, const GridSpec& spec) {
  std::vector<Position2D> out;
  for (const auto& p : q.positions()) out.push_back(spec.node_position(nearest_node(spec, p)));
  return PlacementVector::from_positions(out);
}

double los_gain(const Scenario& scenario, std::size_t k, const Position2D& q, double beta0_db) {
  const Position2D& w = scenario.gbs_positions[k];
  const double dz = scenario.uav_altitude - scenario.gbs_height;
  const double dx = q.x - w.x;
  const double dy = q.y - w.y;
  return db_to_linear(beta0_db) / (dx * dx + dy * dy + dz * dz);
}

double los_weighted_sum_rate(const Scenario& scenario, const PlacementVector& q, double beta0_db) {
  const std::size_t n = scenario.num_links();
  Eigen::MatrixXd rx(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = dbm_to_watts(scenario.tx_power_dbm[j]);
    for (std::size_t k = 0; k < n; ++k) rx(k, j) = p * los_gain(scenario, k, q.uav(j), beta0_db);
  }
  return weighted_sum_rate_from_received(scenario.rate_weights, noise_watts(scenario), rx);
}

PlacementVector los_design(const Scenario& scenario, double beta0_db, const DfoConfig& config,
                           SeededRng& rng, OptTrace* trace) {
  scenario.validate();
  const Box box = Box::from_region(scenario.region, scenario.num_links());
  const Objective f = [&](const Eigen::VectorXd& x) {
    return los_weighted_sum_rate(scenario, PlacementVector(x), beta0_db);
  };
  OptTrace t = optimize(f, box, box.clamp(hovering_baseline(scenario).coords()), config, rng);
  PlacementVector out(t.best_point);
  if (trace) *trace = std::move(t);
  return out;
}

}  // namespace ckmopt
