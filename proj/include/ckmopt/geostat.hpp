#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ckmopt/core.hpp"

namespace ckmopt {

struct VariogramBin {
  double lag_center = 0.0;  ///< mean separation of the pairs in the bin
  double semivariance = 0.0;
  std::size_t pair_count = 0;
};

struct EmpiricalVariogram {
  std::vector<VariogramBin> bins;
};

enum class VariogramModel { kExponential, kSpherical };

/// a: nugget, b: partial sill, c: range scale.
struct SemivariogramParams {
  VariogramModel kind = VariogramModel::kExponential;
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;

  void validate() const;
};

/// Matheron estimator: half the mean squared gain difference over the pairs
/// whose separation falls in [k*bin_width, (k+1)*bin_width), up to max_lag.
/// Only non-empty bins are returned.
EmpiricalVariogram empirical_semivariogram(std::span<const ChannelSample> samples,
                                           double bin_width, double max_lag);

struct VariogramBinning {
  double bin_width = 0.0;
  double max_lag = 0.0;
};

/// bin width = grid spacing, max lag = half the diagonal of the grid extent.
VariogramBinning default_binning(const GridSpec& spec);

/// Model value. Exponential: a + b(1 - exp(-h/c)). Spherical:
/// a + b(3h/2c - (h/c)^3 / 2) up to h = c, then the a + b plateau.
double gamma_value(const SemivariogramParams& params, double h);

/// Weighted least-squares fit (weights = pair counts). For fixed c the
/// (a, b) pair is a small constrained linear problem; c itself is found by a
/// log-spaced sweep refined with golden-section search.
SemivariogramParams fit_semivariogram(const EmpiricalVariogram& emp, VariogramModel kind);

struct KrigingWeights {
  std::vector<double> weights;
  double mu = 0.0;  ///< Lagrange multiplier of the unbiasedness constraint
};

/// Ordinary Kriging system over a fixed set of sample positions. The
/// (N+1)x(N+1) matrix depends only on geometry, so it is factorized once and
/// reused for every target.
class KrigingSystem {
 public:
  /// Duplicate positions are dropped (first occurrence kept). Throws
  /// std::runtime_error when the matrix stays singular after one jitter retry.
  KrigingSystem(std::span<const Position2D> positions, const SemivariogramParams& params);

  std::size_t size() const { return positions_.size(); }
  std::size_t input_count() const { return input_count_; }
  /// Index into the constructor input for each retained position.
  const std::vector<std::size_t>& source_indices() const { return source_; }
  const std::vector<Position2D>& positions() const { return positions_; }
  const SemivariogramParams& params() const { return params_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  KrigingWeights weights(const Position2D& target) const;
  /// Weights for many targets in one multi-RHS solve (column t = target t).
  Eigen::MatrixXd weights_batch(std::span<const Position2D> targets) const;

  /// Solves for the dual coefficients of a value vector (one per retained
  /// position). prediction(t) = sum_i coef_i * gamma(x_i, t) + coef_N.
  Eigen::VectorXd dual_coefficients(std::span<const double> values) const;
  double predict_dual(const Eigen::VectorXd& coefficients, const Position2D& target) const;

  /// Right-hand side [gamma(x_i, target); 1].
  Eigen::VectorXd rhs(const Position2D& target) const;

 private:
  double semivariance(double h) const;

  std::vector<Position2D> positions_;
  std::vector<std::size_t> source_;
  std::size_t input_count_ = 0;
  SemivariogramParams params_;
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

std::vector<Position2D> positions_of(std::span<const ChannelSample> samples);

KrigingWeights kriging_weights(const KrigingSystem& system, const Position2D& target);

/// `samples` must be the list the system was built from.
double kriging_predict(const KrigingSystem& system, std::span<const ChannelSample> samples,
                       const Position2D& target);

/// Mean of the k nearest gains; equal distances resolve to the lower index.
double knn_predict(std::span<const ChannelSample> samples, const Position2D& target,
                   std::size_t k);

/// Free-space LoS model beta0 / (|x - w|^2 + (H - H_gbs)^2), in dB.
double los_model_predict(const Position2D& target, const Position2D& gbs, double beta0_db,
                         double uav_altitude, double gbs_height);

struct KrigingMethod {
  SemivariogramParams params;
  /// Per-target k-nearest neighbourhood; the global system is used when unset.
  std::optional<std::size_t> neighborhood;
};

struct KnnMethod {
  std::size_t k = 5;
};

struct LosMethod {
  Position2D gbs;
  double beta0_db = -30.0;
  double uav_altitude = 50.0;
  double gbs_height = 2.0;
};

using ConstructionMethod = std::variant<KrigingMethod, KnnMethod, LosMethod>;

GainGrid construct_ckm(std::span<const ChannelSample> samples, const GridSpec& spec,
                       const ConstructionMethod& method);

/// Empirical variogram with default binning, fit, then global Kriging.
GainGrid construct_kriging_ckm(std::span<const ChannelSample> samples, const GridSpec& spec,
                               VariogramModel kind, SemivariogramParams* fitted = nullptr);

double mae(const GainGrid& estimate, const GainGrid& truth);

}  // namespace ckmopt
