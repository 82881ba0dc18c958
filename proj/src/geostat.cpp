#include "ckmopt/geostat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace ckmopt {

void SemivariogramParams::validate() const {
  if (!(a >= 0.0) || !(b > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("SemivariogramParams: need a >= 0, b > 0, c > 0");
  }
}

EmpiricalVariogram empirical_semivariogram(std::span<const ChannelSample> samples,
                                           double bin_width, double max_lag) {
  if (samples.size() < 2) {
    throw std::invalid_argument("empirical_semivariogram: need at least 2 samples");
  }
  if (!(bin_width > 0.0) || !(max_lag > 0.0)) {
    throw std::invalid_argument("empirical_semivariogram: bin_width and max_lag must be positive");
  }
  const auto nbins = static_cast<std::size_t>(std::ceil(max_lag / bin_width));
  std::vector<double> sum_sq(nbins, 0.0);
  std::vector<double> sum_h(nbins, 0.0);
  std::vector<std::size_t> count(nbins, 0);

  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double h = distance(samples[i].position, samples[j].position);
      if (h > max_lag) continue;
      const std::size_t k = std::min(static_cast<std::size_t>(h / bin_width), nbins - 1);
      const double d = samples[i].gain_db - samples[j].gain_db;
      sum_sq[k] += d * d;
      sum_h[k] += h;
      ++count[k];
    }
  }

  EmpiricalVariogram out;
  for (std::size_t k = 0; k < nbins; ++k) {
    if (count[k] == 0) continue;
    const auto n = static_cast<double>(count[k]);
    out.bins.push_back({sum_h[k] / n, sum_sq[k] / (2.0 * n), count[k]});
  }
  return out;
}

VariogramBinning default_binning(const GridSpec& spec) {
  const Rect r = spec.bounds();
  return {spec.spacing, 0.5 * std::hypot(r.width(), r.height())};
}

namespace {

// Normalized model shape in [0, 1]: gamma = a + b * shape(h / c).
double model_shape(VariogramModel kind, double r) {
  switch (kind) {
    case VariogramModel::kExponential:
      return 1.0 - std::exp(-r);
    case VariogramModel::kSpherical:
      return r >= 1.0 ? 1.0 : 1.5 * r - 0.5 * r * r * r;
  }
  return 0.0;
}

struct ProfileFit {
  double a = 0.0;
  double b = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Best (a >= 0, b > 0) for a fixed range c.
ProfileFit fit_linear_part(const EmpiricalVariogram& emp, VariogramModel kind, double c) {
  double sw = 0, sf = 0, sff = 0, sy = 0, sfy = 0;
  for (const auto& bin : emp.bins) {
    const double w = static_cast<double>(bin.pair_count);
    const double f = model_shape(kind, bin.lag_center / c);
    sw += w;
    sf += w * f;
    sff += w * f * f;
    sy += w * bin.semivariance;
    sfy += w * f * bin.semivariance;
  }
  ProfileFit fit;
  const double det = sw * sff - sf * sf;
  bool solved = false;
  if (det > 1e-12 * sw * sff) {
    fit.a = (sff * sy - sf * sfy) / det;
    fit.b = (sw * sfy - sf * sy) / det;
    solved = fit.a >= 0.0;
  }
  if (!solved) {
    // Nugget pinned at zero.
    fit.a = 0.0;
    fit.b = sff > 0.0 ? sfy / sff : 0.0;
  }
  if (!(fit.b > 0.0)) return {};
  fit.sse = 0.0;
  for (const auto& bin : emp.bins) {
    const double r =
        bin.semivariance - fit.a - fit.b * model_shape(kind, bin.lag_center / c);
    fit.sse += static_cast<double>(bin.pair_count) * r * r;
  }
  return fit;
}

}  // namespace

double gamma_value(const SemivariogramParams& params, double h) {
  if (h < 0.0) throw std::invalid_argument("gamma_value: negative lag");
  return params.a + params.b * model_shape(params.kind, h / params.c);
}

SemivariogramParams fit_semivariogram(const EmpiricalVariogram& emp, VariogramModel kind) {
  if (emp.bins.size() < 3) {
    throw std::invalid_argument("fit_semivariogram: need at least 3 non-empty bins, got " +
                                std::to_string(emp.bins.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(
      emp.bins.begin(), emp.bins.end(),
      [](const VariogramBin& l, const VariogramBin& r) { return l.semivariance < r.semivariance; });
  if (hi_it->semivariance - lo_it->semivariance <=
      1e-12 * std::max(1.0, std::abs(hi_it->semivariance))) {
    throw std::invalid_argument("fit_semivariogram: degenerate fit, all semivariances equal");
  }

  double h_min = std::numeric_limits<double>::infinity();
  double h_max = 0.0;
  for (const auto& bin : emp.bins) {
    if (bin.lag_center > 0.0) h_min = std::min(h_min, bin.lag_center);
    h_max = std::max(h_max, bin.lag_center);
  }
  const double log_lo = std::log(0.05 * h_min);
  const double log_hi = std::log(20.0 * h_max);
  constexpr int kSweep = 240;
  auto sse_at = [&](double log_c) { return fit_linear_part(emp, kind, std::exp(log_c)).sse; };

  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSweep; ++k) {
    const double s = sse_at(log_lo + (log_hi - log_lo) * k / kSweep);
    if (s < best_sse) {
      best_sse = s;
      best = k;
    }
  }
  if (!std::isfinite(best_sse)) {
    throw std::invalid_argument("fit_semivariogram: degenerate fit, no positive sill found");
  }

  // Golden-section refinement between the neighbours of the best sweep point.
  const double step = (log_hi - log_lo) / kSweep;
  double lo = log_lo + step * std::max(best - 1, 0);
  double hi = log_lo + step * std::min(best + 1, kSweep);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sse_at(x1);
  double f2 = sse_at(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse_at(x2);
    }
  }
  double log_c = f1 < f2 ? x1 : x2;
  if (std::min(f1, f2) > best_sse) log_c = log_lo + step * best;

  const double c = std::exp(log_c);
  const ProfileFit fit = fit_linear_part(emp, kind, c);
  return {kind, fit.a, fit.b, c};
}

// ---------------------------------------------------------------------------

KrigingSystem::KrigingSystem(std::span<const Position2D> positions,
                             const SemivariogramParams& params)
    : input_count_(positions.size()), params_(params) {
  params_.validate();
  if (positions.empty()) throw std::invalid_argument("KrigingSystem: need at least one sample");

  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return std::pair(positions[l].x, positions[l].y) < std::pair(positions[r].x, positions[r].y);
  });
  std::vector<bool> keep(positions.size(), true);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (positions[order[k]] == positions[order[k - 1]]) keep[order[k]] = false;
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!keep[i]) continue;
    positions_.push_back(positions[i]);
    source_.push_back(i);
  }

  const auto n = static_cast<Eigen::Index>(positions_.size());
  matrix_.resize(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    matrix_(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double g = semivariance(distance(positions_[i], positions_[j]));
      matrix_(i, j) = g;
      matrix_(j, i) = g;
    }
    matrix_(i, n) = 1.0;
    matrix_(n, i) = 1.0;
  }
  matrix_(n, n) = 0.0;

  constexpr double kMinRcond = 1e-14;
  lu_.compute(matrix_);
  if (!(lu_.rcond() > kMinRcond)) {
    Eigen::MatrixXd jittered = matrix_;
    jittered.diagonal().head(n).array() += 1e-10;
    lu_.compute(jittered);
    if (!(lu_.rcond() > kMinRcond)) {
      throw std::runtime_error("KrigingSystem: singular system after jitter retry");
    }
  }
}

// gamma(0) is zero by definition; the nugget only applies for h > 0.
double KrigingSystem::semivariance(double h) const {
  return h == 0.0 ? 0.0 : gamma_value(params_, h);
}

Eigen::VectorXd KrigingSystem::rhs(const Position2D& target) const {
  const auto n = static_cast<Eigen::Index>(positions_.size());
  Eigen::VectorXd b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = semivariance(distance(positions_[i], target));
  b(n) = 1.0;
  return b;
}

KrigingWeights KrigingSystem::weights(const Position2D& target) const {
  const Eigen::VectorXd sol = lu_.solve(rhs(target));
  const auto n = static_cast<Eigen::Index>(positions_.size());
  KrigingWeights out;
  out.weights.assign(sol.data(), sol.data() + n);
  // Rows read sum_j w_j gamma_ij + lambda = gamma_i0, so mu = -lambda.
  out.mu = -sol(n);
  return out;
}

Eigen::MatrixXd KrigingSystem::weights_batch(std::span<const Position2D> targets) const {
  const auto n = static_cast<Eigen::Index>(positions_.size());
  Eigen::MatrixXd rhs_block(n + 1, static_cast<Eigen::Index>(targets.size()));
  for (Eigen::Index t = 0; t < rhs_block.cols(); ++t) rhs_block.col(t) = rhs(targets[t]);
  return lu_.solve(rhs_block).topRows(n);
}

Eigen::VectorXd KrigingSystem::dual_coefficients(std::span<const double> values) const {
  const auto n = static_cast<Eigen::Index>(positions_.size());
  if (values.size() != positions_.size()) {
    throw std::invalid_argument("KrigingSystem: value count does not match system size");
  }
  Eigen::VectorXd b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = values[i];
  b(n) = 0.0;
  // The matrix is symmetric, so z^T A^{-1} r(t) = (A^{-1} z)^T r(t).
  return lu_.solve(b);
}

double KrigingSystem::predict_dual(const Eigen::VectorXd& coefficients,
                                   const Position2D& target) const {
  const std::size_t n = positions_.size();
  double acc = coefficients(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    acc += coefficients(static_cast<Eigen::Index>(i)) *
           semivariance(distance(positions_[i], target));
  }
  return acc;
}

std::vector<Position2D> positions_of(std::span<const ChannelSample> samples) {
  std::vector<Position2D> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.position);
  return out;
}

KrigingWeights kriging_weights(const KrigingSystem& system, const Position2D& target) {
  return system.weights(target);
}

namespace {

std::vector<double> retained_values(const KrigingSystem& system,
                                    std::span<const ChannelSample> samples) {
  if (samples.size() != system.input_count()) {
    throw std::invalid_argument("kriging: samples do not match the system they built");
  }
  std::vector<double> values;
  values.reserve(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    const ChannelSample& s = samples[system.source_indices()[i]];
    if (!(s.position == system.positions()[i])) {
      throw std::invalid_argument("kriging: sample positions do not match the system");
    }
    values.push_back(s.gain_db);
  }
  return values;
}

}  // namespace

double kriging_predict(const KrigingSystem& system, std::span<const ChannelSample> samples,
                       const Position2D& target) {
  const std::vector<double> values = retained_values(system, samples);
  const KrigingWeights w = system.weights(target);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += w.weights[i] * values[i];
  return acc;
}

double knn_predict(std::span<const ChannelSample> samples, const Position2D& target,
                   std::size_t k) {
  if (k < 1 || k > samples.size()) {
    throw std::invalid_argument("knn_predict: k must be in [1, " +
                                std::to_string(samples.size()) + "]");
  }
  std::vector<std::pair<double, std::size_t>> dist(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double dx = samples[i].position.x - target.x;
    const double dy = samples[i].position.y - target.y;
    dist[i] = {dx * dx + dy * dy, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double acc = 0.0;
  for (std::size_t r = 0; r < k; ++r) acc += samples[dist[r].second].gain_db;
  return acc / static_cast<double>(k);
}

double los_model_predict(const Position2D& target, const Position2D& gbs, double beta0_db,
                         double uav_altitude, double gbs_height) {
  const double dx = target.x - gbs.x;
  const double dy = target.y - gbs.y;
  const double dz = gbs_height - uav_altitude;
  const double d2 = dx * dx + dy * dy + dz * dz;
  if (d2 == 0.0) throw std::invalid_argument("los_model_predict: zero distance to GBS");
  return beta0_db - 10.0 * std::log10(d2);
}

namespace {

std::vector<ChannelSample> nearest_subset(std::span<const ChannelSample> samples,
                                          const Position2D& target, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double dx = samples[i].position.x - target.x;
    const double dy = samples[i].position.y - target.y;
    dist[i] = {dx * dx + dy * dy, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<ChannelSample> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back(samples[dist[r].second]);
  return out;
}

}  // namespace

GainGrid construct_ckm(std::span<const ChannelSample> samples, const GridSpec& spec,
                       const ConstructionMethod& method) {
  spec.validate();
  std::vector<double> out(spec.size());

  if (const auto* kriging = std::get_if<KrigingMethod>(&method)) {
    if (samples.empty()) throw std::invalid_argument("construct_ckm: no samples");
    if (kriging->neighborhood && *kriging->neighborhood < samples.size()) {
      const std::size_t k = *kriging->neighborhood;
      if (k == 0) throw std::invalid_argument("construct_ckm: empty Kriging neighbourhood");
      for (std::size_t t = 0; t < spec.size(); ++t) {
        const Position2D p = spec.node_position(t);
        const auto local = nearest_subset(samples, p, k);
        const std::vector<Position2D> pos = positions_of(local);
        const KrigingSystem system(pos, kriging->params);
        out[t] = kriging_predict(system, local, p);
      }
    } else {
      const std::vector<Position2D> pos = positions_of(samples);
      const KrigingSystem system(pos, kriging->params);
      const Eigen::VectorXd coef = system.dual_coefficients(retained_values(system, samples));
      for (std::size_t t = 0; t < spec.size(); ++t) {
        out[t] = system.predict_dual(coef, spec.node_position(t));
      }
    }
  } else if (const auto* knn = std::get_if<KnnMethod>(&method)) {
    for (std::size_t t = 0; t < spec.size(); ++t) {
      out[t] = knn_predict(samples, spec.node_position(t), knn->k);
    }
  } else {
    const auto& los = std::get<LosMethod>(method);
    for (std::size_t t = 0; t < spec.size(); ++t) {
      out[t] = los_model_predict(spec.node_position(t), los.gbs, los.beta0_db, los.uav_altitude,
                                 los.gbs_height);
    }
  }
  return GainGrid(spec, std::move(out));
}

GainGrid construct_kriging_ckm(std::span<const ChannelSample> samples, const GridSpec& spec,
                               VariogramModel kind, SemivariogramParams* fitted) {
  const VariogramBinning binning = default_binning(spec);
  const EmpiricalVariogram emp =
      empirical_semivariogram(samples, binning.bin_width, binning.max_lag);
  const SemivariogramParams params = fit_semivariogram(emp, kind);
  if (fitted) *fitted = params;
  return construct_ckm(samples, spec, KrigingMethod{params, std::nullopt});
}

double mae(const GainGrid& estimate, const GainGrid& truth) {
  if (!(estimate.spec() == truth.spec())) {
    throw std::invalid_argument("mae: grids have different specs");
  }
  double acc = 0.0;
  const auto e = estimate.values();
  const auto t = truth.values();
  for (std::size_t k = 0; k < e.size(); ++k) acc += std::abs(e[k] - t[k]);
  return acc / static_cast<double>(e.size());
}

}  // namespace ckmopt
