#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ckmopt/core.hpp"
#include "ckmopt/rng.hpp"

namespace ckmopt {

/// Axis-aligned feasible box in R^n.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Per-UAV region repeated K times: (x1, y1, ..., xK, yK).
  static Box from_region(const Rect& region, std::size_t num_uavs);

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
  void validate() const;
};

struct DfoConfig {
  double delta0 = 50.0;  ///< initial and reset trust-region radius, meters
  double beta = 0.5;     ///< shrink factor on a rejected trial
  double epsilon = 0.5;  ///< convergence radius, meters
  std::size_t max_iter = 500;

  void validate() const;
};

/// phi(x_c + s) = f0 + g^T s + s^T G s / 2.
struct QuadraticSurrogate {
  double f0 = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd G;

  double value(const Eigen::VectorXd& s) const { return f0 + g.dot(s) + 0.5 * s.dot(G * s); }
  /// phi(x_c + s) - f0, without the constant.
  double gain(const Eigen::VectorXd& s) const { return g.dot(s) + 0.5 * s.dot(G * s); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const { return g + G * s; }
};

/// The m - 1 = (n+1)(n+2)/2 - 1 points whose cached objective values pin the
/// surrogate alongside the local point.
struct InterpolationSet {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;  ///< NaN until evaluated
};

std::size_t interpolation_set_size(std::size_t dim);

/// Largest condition number accepted for the interpolation matrix.
inline constexpr double kMaxInterpolationCondition = 1e10;

/// Raised when the interpolation set cannot determine a unique quadratic.
class DegenerateSetError : public std::runtime_error {
 public:
  DegenerateSetError(const std::string& what, std::size_t offending)
      : std::runtime_error(what), offending_(offending) {}
  /// Index of the set point contributing most to the near-dependency.
  std::size_t offending() const { return offending_; }

 private:
  std::size_t offending_;
};

/// Conditioning diagnostics for the anchored interpolation system whose rows
/// are the linear and quadratic monomials of y_l - local. Displacements are
/// normalized by the set radius, then rows and columns are equilibrated, so
/// the number reflects geometry rather than units.
struct InterpolationConditioning {
  double condition = 0.0;
  std::size_t offending = 0;
};

InterpolationConditioning interpolation_conditioning(const Eigen::VectorXd& local,
                                                     const std::vector<Eigen::VectorXd>& points);

/// Uniform draws over the box, redrawn (up to 50 times) until the set is
/// non-degenerate with respect to q0. Values are left as NaN.
InterpolationSet init_interpolation_set(const Box& box, const Eigen::VectorXd& q0, SeededRng& rng);

/// Solves the m - 1 interpolation conditions phi(y_l) = f(y_l), with the
/// constant term anchored at f_local. Throws DegenerateSetError.
QuadraticSurrogate fit_surrogate(const Eigen::VectorXd& local, double f_local,
                                 const InterpolationSet& set);

/// Approximate maximizer of the surrogate over {|s| <= delta, q_c + s in box}.
/// The result is at least as good as the zero step, the projected-gradient
/// step with backtracking, +-delta along each axis, and 64 random feasible
/// starts refined by projected-gradient ascent.
Eigen::VectorXd solve_trust_region_subproblem(const QuadraticSurrogate& surrogate, double delta,
                                              const Box& box, const Eigen::VectorXd& q_c,
                                              SeededRng& rng);

/// Euclidean projection onto {|s| <= delta} intersected with [lo, hi]; lo <= 0 <= hi.
Eigen::VectorXd project_ball_box(const Eigen::VectorXd& x, double delta, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi);

enum class Termination { kConverged, kIterationBudget };

struct IterationRecord {
  std::size_t iteration = 0;
  double delta = 0.0;  ///< radius used for this iteration's subproblem
  double step_norm = 0.0;
  double f_trial = 0.0;
  bool accepted = false;
  double f_current = 0.0;  ///< objective at the local point after the update
  double f_best = 0.0;
  std::size_t set_size = 0;
  double set_radius = 0.0;  ///< max |y - q_c| after the update
  bool reset = false;       ///< delta was reset to delta0 after this iteration
  std::size_t resamples = 0;
};

struct OptTrace {
  std::vector<IterationRecord> records;
  Eigen::VectorXd best_point;
  double best_value = 0.0;
  Eigen::VectorXd final_local_point;
  double final_delta = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;           ///< all objective calls
  std::size_t resample_evaluations = 0;  ///< calls spent on degeneracy repair
  Termination termination = Termination::kIterationBudget;
  double wall_time_s = 0.0;
};

const char* to_string(Termination t);

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Quadratic-model trust-region maximization of a black-box objective over a
/// box. Each iteration fits the surrogate, takes the subproblem step,
/// evaluates one trial point, and updates the local point, radius and
/// interpolation set. Returns the best point seen.
OptTrace optimize(const Objective& objective, const Box& box, const Eigen::VectorXd& q0,
                  const DfoConfig& config, SeededRng& rng);

/// Same, starting from the given m - 1 interpolation points instead of random
/// draws. An empty vector means random draws.
OptTrace optimize(const Objective& objective, const Box& box, const Eigen::VectorXd& q0,
                  const DfoConfig& config, SeededRng& rng,
                  std::vector<Eigen::VectorXd> initial_points);

}  // namespace ckmopt
