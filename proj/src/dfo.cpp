#include "ckmopt/dfo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace ckmopt {

Box Box::from_region(const Rect& region, std::size_t num_uavs) {
  const auto n = static_cast<Eigen::Index>(2 * num_uavs);
  Box box{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index k = 0; k < n; k += 2) {
    box.lower(k) = region.x_min;
    box.upper(k) = region.x_max;
    box.lower(k + 1) = region.y_min;
    box.upper(k + 1) = region.y_max;
  }
  return box;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Eigen::VectorXd Box::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument("Box: bounds must be non-empty and of equal dimension");
  }
  if (!(upper.array() > lower.array()).all()) {
    throw std::invalid_argument("Box: upper bound must exceed lower bound in every coordinate");
  }
}

void DfoConfig::validate() const {
  if (!(epsilon > 0.0) || !(delta0 > epsilon)) {
    throw std::invalid_argument("DfoConfig: need delta0 > epsilon > 0");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("DfoConfig: beta must be in (0, 1)");
  if (max_iter < 1) throw std::invalid_argument("DfoConfig: max_iter must be >= 1");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kIterationBudget:
      return "iteration budget";
  }
  return "unknown";
}

std::size_t interpolation_set_size(std::size_t dim) { return (dim + 1) * (dim + 2) / 2 - 1; }

namespace {

// Linear monomials d_i, then 0.5 d_i^2 and d_i d_j (i < j) in row-major order
// of the upper triangle.
template <class Row>
void monomial_row(const Eigen::VectorXd& d, Row&& row) {
  const Eigen::Index n = d.size();
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < n; ++i) row(c++) = d(i);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) row(c++) = (i == j ? 0.5 : 1.0) * d(i) * d(j);
  }
}

struct ScaledSystem {
  Eigen::MatrixXd matrix;    // equilibrated
  Eigen::VectorXd row_scale;  // multiplies each row
  Eigen::VectorXd col_scale;  // multiplies each column
  double radius = 0.0;
  std::size_t zero_row = std::numeric_limits<std::size_t>::max();
};

ScaledSystem build_scaled_system(const Eigen::VectorXd& local,
                                 const std::vector<Eigen::VectorXd>& points) {
  const auto n = static_cast<std::size_t>(local.size());
  const std::size_t m1 = interpolation_set_size(n);
  if (points.size() != m1) {
    throw std::invalid_argument("interpolation set must hold " + std::to_string(m1) +
                                " points, got " + std::to_string(points.size()));
  }
  ScaledSystem sys;
  for (const auto& p : points) sys.radius = std::max(sys.radius, (p - local).norm());
  const auto size = static_cast<Eigen::Index>(m1);
  sys.matrix.resize(size, size);
  sys.row_scale = Eigen::VectorXd::Ones(size);
  sys.col_scale = Eigen::VectorXd::Ones(size);
  if (sys.radius == 0.0) {
    sys.zero_row = 0;
    return sys;
  }
  for (Eigen::Index l = 0; l < size; ++l) {
    monomial_row((points[static_cast<std::size_t>(l)] - local) / sys.radius, sys.matrix.row(l));
  }
  for (Eigen::Index l = 0; l < size; ++l) {
    const double mx = sys.matrix.row(l).cwiseAbs().maxCoeff();
    if (mx == 0.0) {
      sys.zero_row = static_cast<std::size_t>(l);
      return sys;
    }
    sys.row_scale(l) = 1.0 / mx;
    sys.matrix.row(l) *= sys.row_scale(l);
  }
  for (Eigen::Index c = 0; c < size; ++c) {
    const double mx = sys.matrix.col(c).cwiseAbs().maxCoeff();
    if (mx > 0.0) {
      sys.col_scale(c) = 1.0 / mx;
      sys.matrix.col(c) *= sys.col_scale(c);
    }
  }
  return sys;
}

InterpolationConditioning conditioning_of(const ScaledSystem& sys,
                                          const Eigen::JacobiSVD<Eigen::MatrixXd>* svd) {
  InterpolationConditioning out;
  if (sys.zero_row != std::numeric_limits<std::size_t>::max()) {
    out.condition = std::numeric_limits<double>::infinity();
    out.offending = sys.zero_row;
    return out;
  }
  const auto& sv = svd->singularValues();
  const double smin = sv(sv.size() - 1);
  out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  Eigen::Index idx = 0;
  svd->matrixU().col(sv.size() - 1).cwiseAbs().maxCoeff(&idx);
  out.offending = static_cast<std::size_t>(idx);
  return out;
}

}  // namespace

InterpolationConditioning interpolation_conditioning(const Eigen::VectorXd& local,
                                                     const std::vector<Eigen::VectorXd>& points) {
  const ScaledSystem sys = build_scaled_system(local, points);
  if (sys.zero_row != std::numeric_limits<std::size_t>::max()) return conditioning_of(sys, nullptr);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeFullU);
  return conditioning_of(sys, &svd);
}

InterpolationSet init_interpolation_set(const Box& box, const Eigen::VectorXd& q0,
                                        SeededRng& rng) {
  box.validate();
  if (!box.contains(q0)) throw std::invalid_argument("init_interpolation_set: q0 outside the box");
  const std::size_t m1 = interpolation_set_size(static_cast<std::size_t>(box.dim()));
  constexpr int kAttempts = 50;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    InterpolationSet set;
    for (std::size_t l = 0; l < m1; ++l) {
      Eigen::VectorXd p(box.dim());
      for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(box.lower(i), box.upper(i));
      set.points.push_back(std::move(p));
    }
    if (interpolation_conditioning(q0, set.points).condition < kMaxInterpolationCondition) {
      set.values.assign(m1, std::numeric_limits<double>::quiet_NaN());
      return set;
    }
  }
  throw std::runtime_error("init_interpolation_set: no non-degenerate set after 50 attempts");
}

QuadraticSurrogate fit_surrogate(const Eigen::VectorXd& local, double f_local,
                                 const InterpolationSet& set) {
  const ScaledSystem sys = build_scaled_system(local, set.points);
  const auto n = local.size();
  if (sys.zero_row != std::numeric_limits<std::size_t>::max()) {
    throw DegenerateSetError("fit_surrogate: point coincides with the local point", sys.zero_row);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
  const InterpolationConditioning cond = conditioning_of(sys, &svd);
  if (!(cond.condition < kMaxInterpolationCondition)) {
    std::ostringstream msg;
    msg << "fit_surrogate: degenerate interpolation set (condition " << cond.condition << ")";
    throw DegenerateSetError(msg.str(), cond.offending);
  }

  const auto size = sys.matrix.rows();
  Eigen::VectorXd rhs(size);
  for (Eigen::Index l = 0; l < size; ++l) rhs(l) = set.values[static_cast<std::size_t>(l)] - f_local;
  const Eigen::VectorXd theta_hat = svd.solve(sys.row_scale.asDiagonal() * rhs);
  const Eigen::VectorXd theta = sys.col_scale.cwiseProduct(theta_hat);

  // theta is expressed in radius-normalized displacements.
  QuadraticSurrogate sur;
  sur.f0 = f_local;
  sur.g = theta.head(n) / sys.radius;
  sur.G.resize(n, n);
  Eigen::Index c = n;
  const double r2 = sys.radius * sys.radius;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      sur.G(i, j) = theta(c) / r2;
      sur.G(j, i) = theta(c) / r2;
      ++c;
    }
  }

  double scale = std::max(std::abs(f_local), 1e-12);
  double worst = 0.0;
  for (Eigen::Index l = 0; l < size; ++l) {
    scale = std::max(scale, std::abs(rhs(l)));
    const Eigen::VectorXd d = set.points[static_cast<std::size_t>(l)] - local;
    worst = std::max(worst, std::abs(sur.gain(d) - rhs(l)));
  }
  if (!(worst <= 1e-8 * scale)) {
    throw DegenerateSetError("fit_surrogate: interpolation residual too large", cond.offending);
  }
  return sur;
}

Eigen::VectorXd project_ball_box(const Eigen::VectorXd& x, double delta, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi) {
  // The projection is clip(mu * x) for the largest mu in [0, 1] with norm <= delta.
  // Coordinate i saturates at its bound once mu exceeds bound_i / x_i, so the
  // squared norm is C + mu^2 F between consecutive breakpoints.
  const Eigen::Index n = x.size();
  Eigen::VectorXd s = x.cwiseMax(lo).cwiseMin(hi);
  if (s.squaredNorm() <= delta * delta) return s;

  std::vector<std::pair<double, Eigen::Index>> breaks;
  breaks.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) == 0.0) continue;
    const double bound = x(i) > 0.0 ? hi(i) : lo(i);
    breaks.emplace_back(std::min(bound / x(i), 1.0), i);
  }
  std::sort(breaks.begin(), breaks.end());

  double clipped = 0.0;  // sum of saturated bound^2
  double free = 0.0;     // sum of x_i^2 over unsaturated coordinates
  for (const auto& [mu_i, i] : breaks) free += x(i) * x(i);
  double mu = 0.0;
  double seg_lo = 0.0;
  const double target = delta * delta;
  for (std::size_t b = 0; b <= breaks.size(); ++b) {
    const double seg_hi = b < breaks.size() ? breaks[b].first : 1.0;
    if (free > 0.0) {
      const double cand = std::sqrt(std::max(target - clipped, 0.0) / free);
      if (cand <= seg_hi) {
        mu = std::max(cand, seg_lo);
        break;
      }
    }
    if (b == breaks.size()) break;
    const Eigen::Index i = breaks[b].second;
    const double bound = x(i) > 0.0 ? hi(i) : lo(i);
    clipped += bound * bound;
    free -= x(i) * x(i);
    seg_lo = seg_hi;
    mu = seg_hi;
  }
  s = (mu * x).cwiseMax(lo).cwiseMin(hi);
  const double norm = s.norm();
  if (norm > delta) s *= delta / norm;
  return s;
}

namespace {

class SubproblemSolver {
 public:
  SubproblemSolver(const QuadraticSurrogate& sur, double delta, Eigen::VectorXd lo,
                   Eigen::VectorXd hi)
      : sur_(sur), delta_(delta), lo_(std::move(lo)), hi_(std::move(hi)) {}

  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return project_ball_box(x, delta_, lo_, hi_);
  }

  // Projected-gradient ascent with backtracking; never returns a worse point.
  Eigen::VectorXd ascend(Eigen::VectorXd s) const {
    double val = sur_.gain(s);
    double t = -1.0;
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd grad = sur_.gradient(s);
      const double gnorm = grad.norm();
      if (gnorm == 0.0) break;
      if (t < 0.0) t = delta_ / gnorm;
      bool improved = false;
      Eigen::VectorXd cand;
      double cand_val = val;
      for (int bt = 0; bt < 40; ++bt) {
        cand = project(s + t * grad);
        cand_val = sur_.gain(cand);
        if (cand_val > val) {
          improved = true;
          break;
        }
        t *= 0.5;
      }
      if (!improved) break;
      const double moved = (cand - s).norm();
      const double rise = cand_val - val;
      s = std::move(cand);
      val = cand_val;
      t *= 2.0;
      if (moved <= 1e-10 * delta_ || rise <= 1e-13 * std::abs(val)) break;
    }
    return s;
  }

  // Backtracking along the projected gradient path from the origin.
  Eigen::VectorXd cauchy() const {
    const double gnorm = sur_.g.norm();
    if (gnorm == 0.0) return Eigen::VectorXd::Zero(sur_.g.size());
    double t = delta_ / gnorm;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd s = project(t * sur_.g);
      if (sur_.gain(s) > 0.0) return s;
      t *= 0.5;
    }
    return Eigen::VectorXd::Zero(sur_.g.size());
  }

 private:
  const QuadraticSurrogate& sur_;
  double delta_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

}  // namespace

Eigen::VectorXd solve_trust_region_subproblem(const QuadraticSurrogate& surrogate, double delta,
                                              const Box& box, const Eigen::VectorXd& q_c,
                                              SeededRng& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("trust-region subproblem: delta must be positive");
  if (!box.contains(q_c)) throw std::invalid_argument("trust-region subproblem: q_c outside box");
  const Eigen::Index n = q_c.size();
  const Eigen::VectorXd lo = (box.lower - q_c).cwiseMin(0.0);
  const Eigen::VectorXd hi = (box.upper - q_c).cwiseMax(0.0);
  const SubproblemSolver solver(surrogate, delta, lo, hi);

  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_gain = 0.0;
  auto consider = [&](const Eigen::VectorXd& s) {
    const double v = surrogate.gain(s);
    if (v > best_gain) {
      best_gain = v;
      best = s;
    }
  };

  const Eigen::VectorXd cauchy = solver.cauchy();
  consider(cauchy);
  consider(solver.ascend(cauchy));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
      s(i) = sign * delta;
      s = solver.project(s);
      consider(s);
      consider(solver.ascend(s));
    }
  }
  constexpr int kRandomStarts = 64;
  for (int r = 0; r < kRandomStarts; ++r) {
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.normal();
    const double norm = u.norm();
    if (norm == 0.0) continue;
    const Eigen::VectorXd s = solver.project(u * (delta / norm));
    consider(s);
    consider(solver.ascend(s));
  }

  // Guard against rounding at the boundary.
  best = best.cwiseMax(lo).cwiseMin(hi);
  const double norm = best.norm();
  if (norm > delta) best *= delta / norm;
  return best;
}

namespace {

struct CountingObjective {
  const Objective& f;
  std::size_t calls = 0;

  double operator()(const Eigen::VectorXd& x) {
    ++calls;
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "optimize: objective returned " << v << " at (";
      for (Eigen::Index i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x(i);
      msg << ")";
      throw std::runtime_error(msg.str());
    }
    return v;
  }
};

Eigen::VectorXd uniform_in(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, SeededRng& rng) {
  Eigen::VectorXd p(lo.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(lo(i), hi(i));
  return p;
}

double set_radius(const Eigen::VectorXd& q_c, const InterpolationSet& set) {
  double r = 0.0;
  for (const auto& y : set.points) r = std::max(r, (y - q_c).norm());
  return r;
}

}  // namespace

OptTrace optimize(const Objective& objective, const Box& box, const Eigen::VectorXd& q0,
                  const DfoConfig& config, SeededRng& rng) {
  return optimize(objective, box, q0, config, rng, {});
}

OptTrace optimize(const Objective& objective, const Box& box, const Eigen::VectorXd& q0,
                  const DfoConfig& config, SeededRng& rng,
                  std::vector<Eigen::VectorXd> initial_points) {
  const auto t_start = std::chrono::steady_clock::now();
  config.validate();
  box.validate();
  if (!box.contains(q0)) throw std::invalid_argument("optimize: q0 outside the box");

  SeededRng init_rng = rng.fork(static_cast<std::uint64_t>(Stream::kDfoInit));
  SeededRng step_rng = rng.fork(static_cast<std::uint64_t>(Stream::kSubproblem));
  SeededRng repair_rng = rng.fork(static_cast<std::uint64_t>(Stream::kDfoResample));
  CountingObjective f{objective};

  OptTrace trace;
  Eigen::VectorXd q_c = q0;
  double f_c = f(q_c);
  InterpolationSet set;
  if (initial_points.empty()) {
    set = init_interpolation_set(box, q0, init_rng);
  } else {
    // Taken as given; a degenerate set is repaired on the first fit.
    if (initial_points.size() != interpolation_set_size(static_cast<std::size_t>(box.dim()))) {
      throw std::invalid_argument("optimize: initial set has the wrong number of points");
    }
    for (const auto& y : initial_points) {
      if (y.size() != box.dim() || !box.contains(y)) {
        throw std::invalid_argument("optimize: initial set point outside the box");
      }
    }
    set.points = std::move(initial_points);
    set.values.assign(set.points.size(), std::numeric_limits<double>::quiet_NaN());
  }
  for (std::size_t l = 0; l < set.points.size(); ++l) set.values[l] = f(set.points[l]);

  trace.best_point = q_c;
  trace.best_value = f_c;
  auto observe = [&](const Eigen::VectorXd& x, double v) {
    if (v > trace.best_value) {
      trace.best_value = v;
      trace.best_point = x;
    }
  };
  for (std::size_t l = 0; l < set.points.size(); ++l) observe(set.points[l], set.values[l]);
  double delta = config.delta0;

  // Refit, replacing degenerate points by draws from the current trust box.
  auto fit_with_repair = [&](std::size_t& resamples) {
    constexpr int kPointAttempts = 50;
    constexpr int kSetAttempts = 50;
    const Eigen::VectorXd lo = box.lower.cwiseMax((q_c.array() - delta).matrix());
    const Eigen::VectorXd hi = box.upper.cwiseMin((q_c.array() + delta).matrix());
    for (int attempt = 0;; ++attempt) {
      try {
        return fit_surrogate(q_c, f_c, set);
      } catch (const DegenerateSetError& e) {
        if (attempt >= kPointAttempts + kSetAttempts) {
          throw std::runtime_error(std::string("optimize: cannot repair interpolation set: ") +
                                   e.what());
        }
        if (attempt < kPointAttempts) {
          const std::size_t idx = e.offending();
          set.points[idx] = uniform_in(lo, hi, repair_rng);
          set.values[idx] = f(set.points[idx]);
          observe(set.points[idx], set.values[idx]);
          ++resamples;
        } else {
          for (std::size_t l = 0; l < set.points.size(); ++l) {
            set.points[l] = uniform_in(lo, hi, repair_rng);
            set.values[l] = f(set.points[l]);
            observe(set.points[l], set.values[l]);
            ++resamples;
          }
        }
      }
    }
  };

  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.delta = delta;

    const QuadraticSurrogate sur = fit_with_repair(rec.resamples);
    trace.resample_evaluations += rec.resamples;

    const Eigen::VectorXd s = solve_trust_region_subproblem(sur, delta, box, q_c, step_rng);
    const Eigen::VectorXd trial = box.clamp(q_c + s);
    const double step_norm = (trial - q_c).norm();
    const double f_trial = f(trial);

    std::size_t out = 0;
    double out_dist = -1.0;
    for (std::size_t l = 0; l < set.points.size(); ++l) {
      const double d = (set.points[l] - q_c).norm();
      if (d > out_dist) {
        out_dist = d;
        out = l;
      }
    }

    if (f_trial > f_c) {
      set.points[out] = q_c;
      set.values[out] = f_c;
      q_c = trial;
      f_c = f_trial;
      rec.accepted = true;
    } else {
      delta *= config.beta;
      if (out_dist >= step_norm) {
        set.points[out] = trial;
        set.values[out] = f_trial;
      }
    }
    observe(trial, f_trial);

    const double radius = set_radius(q_c, set);
    rec.step_norm = step_norm;
    rec.f_trial = f_trial;
    rec.f_current = f_c;
    rec.f_best = trace.best_value;
    rec.set_size = set.points.size();
    rec.set_radius = radius;

    bool done = false;
    if (delta < config.epsilon) {
      bool any_near = false;
      for (const auto& y : set.points) any_near = any_near || (y - q_c).norm() <= config.epsilon;
      if (radius <= config.epsilon) {
        done = true;
      } else if (!any_near) {
        delta = config.delta0;
        rec.reset = true;
      }
    }
    trace.records.push_back(rec);
    trace.iterations = iter;
    if (done) {
      trace.termination = Termination::kConverged;
      break;
    }
  }

  trace.final_local_point = q_c;
  trace.final_delta = delta;
  trace.evaluations = f.calls;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace ckmopt
