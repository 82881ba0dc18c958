#include "ckmopt/truth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ckmopt {

void TruthParams::validate() const {
  if (!(n_los > 0.0) || !(n_nlos > 0.0)) {
    throw std::invalid_argument("TruthParams: path-loss exponents must be positive");
  }
  if (!(shadow_std_db >= 0.0)) throw std::invalid_argument("TruthParams: shadow_std_db < 0");
  if (!(shadow_corr_len > 0.0)) throw std::invalid_argument("TruthParams: shadow_corr_len <= 0");
}

namespace {

bool overlaps(const Rect& a, const Rect& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

// Liang-Barsky clip of p0 + t (p1 - p0), t in [0,1], against a closed rectangle.
bool clip_segment(const Rect& r, double x0, double y0, double x1, double y1, double& t0,
                  double& t1) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - r.x_min, r.x_max - x0, y0 - r.y_min, r.y_max - y0};
  t0 = 0.0;
  t1 = 1.0;
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

BuildingLayout generate_layout(const Rect& region, std::size_t n_buildings, SeededRng& rng,
                               const LayoutOptions& options) {
  if (options.min_side > options.max_side || !(options.min_side > 0.0) ||
      options.min_height > options.max_height || !(options.min_height > 0.0)) {
    throw std::invalid_argument("generate_layout: inconsistent size/height ranges");
  }
  BuildingLayout layout;
  layout.reserve(n_buildings);
  for (std::size_t b = 0; b < n_buildings; ++b) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < options.max_attempts_per_building; ++attempt) {
      const double w = rng.uniform(options.min_side, options.max_side);
      const double h = rng.uniform(options.min_side, options.max_side);
      const double height = rng.uniform(options.min_height, options.max_height);
      if (w >= region.width() || h >= region.height()) continue;
      const double x0 = rng.uniform(region.x_min, region.x_max - w);
      const double y0 = rng.uniform(region.y_min, region.y_max - h);
      const Rect box{x0, x0 + w, y0, y0 + h};
      const bool clash =
          std::any_of(layout.begin(), layout.end(),
                      [&](const Building& other) { return overlaps(box, other.footprint); }) ||
          std::any_of(options.keep_clear.begin(), options.keep_clear.end(),
                      [&](const Position2D& p) { return box.contains(p); });
      if (clash) continue;
      layout.push_back({box, height});
      placed = true;
      break;
    }
    if (!placed) {
      throw std::runtime_error("generate_layout: could not place building " + std::to_string(b + 1) +
                               " of " + std::to_string(n_buildings) + "; region too small");
    }
  }
  return layout;
}

bool los_blocked(const BuildingLayout& layout, const Point3D& tx, const Point3D& rx) {
  for (const Building& b : layout) {
    double t0 = 0.0;
    double t1 = 0.0;
    if (!clip_segment(b.footprint, tx.x, tx.y, rx.x, rx.y, t0, t1)) continue;
    // Height is linear in t, so its minimum over the crossing is at an end.
    const double z0 = tx.z + t0 * (rx.z - tx.z);
    const double z1 = tx.z + t1 * (rx.z - tx.z);
    if (std::min(z0, z1) < b.height) return true;
  }
  return false;
}

GaussianFieldSampler::GaussianFieldSampler(const GridSpec& spec, double std_db, double corr_len)
    : spec_(spec), std_db_(std_db), corr_len_(corr_len) {
  spec_.validate();
  if (!(std_db >= 0.0)) throw std::invalid_argument("gaussian_random_field: std_db < 0");
  if (!(corr_len > 0.0)) throw std::invalid_argument("gaussian_random_field: corr_len <= 0");
  const std::size_t n = spec_.size();
  if (n > kMaxDenseFieldNodes) {
    throw std::invalid_argument("gaussian_random_field: " + std::to_string(n) +
                                " nodes exceeds the dense budget of " +
                                std::to_string(kMaxDenseFieldNodes) + "; use a coarser grid");
  }
  if (std_db == 0.0) return;

  const double variance = std_db * std_db;
  Eigen::MatrixXd cov(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const Position2D pa = spec_.node_position(a);
    cov(a, a) = variance;
    for (std::size_t b = 0; b < a; ++b) {
      const double c = variance * std::exp(-distance(pa, spec_.node_position(b)) / corr_len);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-8 * variance;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("gaussian_random_field: covariance factorization failed");
    }
  }
  lower_ = llt.matrixL();
}

GainGrid GaussianFieldSampler::draw(SeededRng& rng) const {
  const std::size_t n = spec_.size();
  if (lower_.size() == 0) return GainGrid::constant(spec_, 0.0);
  Eigen::VectorXd xi(n);
  for (std::size_t k = 0; k < n; ++k) xi(k) = rng.normal();
  const Eigen::VectorXd field = lower_.triangularView<Eigen::Lower>() * xi;
  return GainGrid(spec_, std::vector<double>(field.data(), field.data() + n));
}

GainGrid gaussian_random_field(const GridSpec& spec, double std_db, double corr_len,
                               SeededRng& rng) {
  return GaussianFieldSampler(spec, std_db, corr_len).draw(rng);
}

GainGrid generate_truth_ckm(const BuildingLayout& layout, const Position2D& gbs,
                            const LinkGeometry& geometry, const GridSpec& spec,
                            const TruthParams& params, SeededRng& rng) {
  params.validate();
  const GaussianFieldSampler shadowing(spec, params.shadow_std_db, params.shadow_corr_len);
  return generate_truth_ckm(layout, gbs, geometry, params, shadowing, rng);
}

GainGrid generate_truth_ckm(const BuildingLayout& layout, const Position2D& gbs,
                            const LinkGeometry& geometry, const TruthParams& params,
                            const GaussianFieldSampler& shadowing, SeededRng& rng) {
  params.validate();
  if (shadowing.std_db() != params.shadow_std_db ||
      shadowing.corr_len() != params.shadow_corr_len) {
    throw std::invalid_argument("generate_truth_ckm: shadowing sampler does not match params");
  }
  const GridSpec& spec = shadowing.spec();
  const GainGrid shadow = shadowing.draw(rng);
  const Point3D tx{gbs.x, gbs.y, geometry.gbs_height};
  const double dz = geometry.uav_altitude - geometry.gbs_height;

  std::vector<double> gains(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const Position2D p = spec.node_position(k);
    const double d = std::max(std::sqrt(std::pow(distance(p, gbs), 2) + dz * dz), 1.0);
    const Point3D rx{p.x, p.y, geometry.uav_altitude};
    double g;
    if (!los_blocked(layout, tx, rx)) {
      g = params.beta0_db - 10.0 * params.n_los * std::log10(d);
    } else {
      g = params.beta0_db - 10.0 * params.n_nlos * std::log10(d) - params.nlos_penalty_db;
    }
    gains[k] = g + shadow[k];
  }
  return GainGrid(spec, std::move(gains));
}

std::vector<ChannelSample> sample_measurements(const GainGrid& truth, std::size_t stride_x_nodes,
                                               std::size_t stride_y_nodes) {
  if (stride_x_nodes == 0 || stride_y_nodes == 0) {
    throw std::invalid_argument("sample_measurements: strides must be >= 1");
  }
  const GridSpec& spec = truth.spec();
  std::vector<ChannelSample> out;
  for (std::size_t j = 0; j < spec.ny; j += stride_y_nodes) {
    for (std::size_t i = 0; i < spec.nx; i += stride_x_nodes) {
      out.push_back({spec.node_position(i, j), truth.at(i, j)});
    }
  }
  return out;
}

std::vector<ChannelSample> sample_random(const GainGrid& truth, std::size_t n, SeededRng& rng) {
  const GridSpec& spec = truth.spec();
  const std::size_t total = spec.size();
  if (n < 1 || n > total) {
    throw std::invalid_argument("sample_random: n must be in [1, " + std::to_string(total) + "]");
  }
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n slots are a uniform draw without replacement.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(total - k));
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<ChannelSample> out;
  out.reserve(n);
  for (std::size_t flat : idx) out.push_back({spec.node_position(flat), truth[flat]});
  return out;
}

}  // namespace ckmopt
