#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "ckmopt/geostat.hpp"
#include "ckmopt/rng.hpp"
#include "ckmopt/truth.hpp"

using namespace ckmopt;

namespace {

EmpiricalVariogram exact_bins(const SemivariogramParams& p, int lags, double step) {
  EmpiricalVariogram emp;
  for (int i = 1; i <= lags; ++i) {
    const double h = i * step;
    emp.bins.push_back({h, gamma_value(p, h), static_cast<std::size_t>(10 + i)});
  }
  return emp;
}

std::vector<ChannelSample> random_positions(SeededRng& r, std::size_t n, double extent) {
  std::vector<ChannelSample> s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back({{r.uniform(0, extent), r.uniform(0, extent)}, r.uniform(-100, -60)});
  }
  return s;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_SUITE("geostat") {

TEST_CASE("empirical semivariogram") {
  const std::vector<ChannelSample> flat{{{0, 0}, 5}, {{3, 0}, 5}, {{0, 7}, 5}, {{9, 9}, 5}};
  for (const auto& b : empirical_semivariogram(flat, 2.0, 20.0).bins) CHECK(b.semivariance == 0.0);

  const std::vector<ChannelSample> two{{{0, 0}, -70}, {{3, 4}, -76}};
  const auto emp = empirical_semivariogram(two, 1.0, 10.0);
  REQUIRE(emp.bins.size() == 1);
  CHECK(emp.bins[0].semivariance == doctest::Approx(18.0));
  CHECK(emp.bins[0].pair_count == 1);
  CHECK(emp.bins[0].lag_center == doctest::Approx(5.0));

  CHECK_THROWS(empirical_semivariogram(std::vector<ChannelSample>{{{0, 0}, 1}}, 1.0, 10.0));

  SeededRng r(2, Stream::kTest);
  const auto many = random_positions(r, 80, 100);
  const auto e = empirical_semivariogram(many, 5.0, 80.0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < e.bins.size(); ++i) {
    CHECK(e.bins[i].pair_count >= 1);
    CHECK(e.bins[i].semivariance >= 0.0);
    if (i > 0) CHECK(e.bins[i].lag_center > e.bins[i - 1].lag_center);
    pairs += e.bins[i].pair_count;
  }
  std::size_t brute = 0;
  for (std::size_t i = 0; i < many.size(); ++i) {
    for (std::size_t j = i + 1; j < many.size(); ++j) brute += distance(many[i].position, many[j].position) < 80.0;
  }
  CHECK(pairs == brute);
}

TEST_CASE("semivariogram models") {
  const SemivariogramParams e{VariogramModel::kExponential, 0.7, 3.0, 12.0};
  CHECK(gamma_value(e, 0.0) == 0.7);
  CHECK(gamma_value({VariogramModel::kExponential, 0, 1, 1}, 100.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(gamma_value({VariogramModel::kExponential, 0, 2, 5}, 5.0) ==
        doctest::Approx(1.26424).epsilon(1e-5));

  const SemivariogramParams s{VariogramModel::kSpherical, 0.5, 2.0, 10.0};
  CHECK(gamma_value(s, 0.0) == 0.5);
  CHECK(gamma_value(s, 5.0) == doctest::Approx(0.5 + 2.0 * (0.75 - 0.0625)));
  CHECK(gamma_value(s, 10.0) == doctest::Approx(2.5));
  CHECK(gamma_value(s, 40.0) == 2.5);

  for (const auto& p : {e, s}) {
    double prev = gamma_value(p, 0.0);
    for (int i = 1; i < 500; ++i) {
      const double v = gamma_value(p, 0.1 * i);
      CHECK(v >= prev);
      prev = v;
    }
  }
  CHECK_THROWS(gamma_value(e, -1.0));
}

TEST_CASE("variogram fit recovers noise-free parameters") {
  const SemivariogramParams truth{VariogramModel::kExponential, 0.5, 3.0, 20.0};
  const auto fit = fit_semivariogram(exact_bins(truth, 30, 4.0), VariogramModel::kExponential);
  CHECK(rel(fit.a, 0.5) <= 1e-3);
  CHECK(rel(fit.b, 3.0) <= 1e-3);
  CHECK(rel(fit.c, 20.0) <= 1e-3);

  const SemivariogramParams sph{VariogramModel::kSpherical, 1.0, 4.0, 60.0};
  const auto fs = fit_semivariogram(exact_bins(sph, 30, 4.0), VariogramModel::kSpherical);
  CHECK(rel(fs.a, 1.0) <= 1e-3);
  CHECK(rel(fs.b, 4.0) <= 1e-3);
  CHECK(rel(fs.c, 60.0) <= 1e-3);

  const SemivariogramParams zero_nugget{VariogramModel::kExponential, 0.0, 16.0, 50.0};
  const auto fz = fit_semivariogram(exact_bins(zero_nugget, 30, 7.0), VariogramModel::kExponential);
  CHECK(fz.a <= 1e-6);
  CHECK(rel(fz.c, 50.0) <= 1e-3);
}

TEST_CASE("variogram fit rejects degenerate input") {
  EmpiricalVariogram two{{{1, 1, 1}, {2, 2, 1}}};
  CHECK_THROWS(fit_semivariogram(two, VariogramModel::kExponential));
  EmpiricalVariogram flat{{{1, 3, 1}, {2, 3, 1}, {3, 3, 1}, {4, 3, 1}}};
  CHECK_THROWS(fit_semivariogram(flat, VariogramModel::kExponential));
}

TEST_CASE("variogram fit on simulated shadowing, Monte Carlo") {
  const GridSpec spec = grid_for_region({-200, 100, -150, 150}, 5.0);
  const GaussianFieldSampler sampler(spec, 4.0, 50.0);
  std::vector<double> bs, cs;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SeededRng fr(seed, Stream::kShadowing);
    const GainGrid field = sampler.draw(fr);
    SeededRng sr(seed, Stream::kSampling);
    const auto samples = sample_random(field, 1000, sr);
    const VariogramBinning bins = default_binning(spec);
    const auto p = fit_semivariogram(empirical_semivariogram(samples, bins.bin_width, bins.max_lag),
                                     VariogramModel::kExponential);
    bs.push_back(p.b);
    cs.push_back(p.c);
  }
  std::nth_element(bs.begin(), bs.begin() + 10, bs.end());
  std::nth_element(cs.begin(), cs.begin() + 10, cs.end());
  MESSAGE("median partial sill " << bs[10] << ", median range " << cs[10]);
  CHECK(std::abs(bs[10] - 16.0) <= 0.3 * 16.0);
  CHECK(std::abs(cs[10] - 50.0) <= 0.3 * 50.0);
}

TEST_CASE("kriging weights, small cases") {
  const SemivariogramParams p{VariogramModel::kExponential, 0.0, 10.0, 30.0};
  const std::vector<Position2D> one{{5, 5}};
  const KrigingSystem s1(one, p);
  CHECK(s1.matrix().rows() == 2);
  const auto w1 = kriging_weights(s1, {40, -3});
  REQUIRE(w1.weights.size() == 1);
  CHECK(w1.weights[0] == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<Position2D> mirror{{-7, 2}, {7, -2}};
  const auto w2 = kriging_weights(KrigingSystem(mirror, p), {0, 0});
  CHECK(w2.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w2.weights[1] == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Position2D> pts{{0, 0}, {10, 0}, {0, 10}, {20, 15}, {-5, 30}};
  const KrigingSystem s(pts, p);
  const auto at = kriging_weights(s, {20, 15});
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(at.weights[i] - (i == 3 ? 1.0 : 0.0)) <= 1e-6);
}

TEST_CASE("duplicate positions are dropped") {
  const SemivariogramParams p{VariogramModel::kExponential, 0.0, 10.0, 30.0};
  const std::vector<ChannelSample> samples{{{0, 0}, -70}, {{10, 0}, -75}, {{0, 0}, -90}, {{5, 8}, -72}};
  const auto pos = positions_of(samples);
  const KrigingSystem s(pos, p);
  CHECK(s.size() == 3);
  CHECK(s.input_count() == 4);
  CHECK(s.source_indices() == std::vector<std::size_t>{0, 1, 3});
  CHECK(kriging_predict(s, samples, {0, 0}) == doctest::Approx(-70.0).epsilon(1e-9));
}

TEST_CASE("kriging unbiasedness, exact interpolation, translation invariance") {
  SeededRng r(4, Stream::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const auto samples = random_positions(r, 5 + r.below(60), 200);
    const SemivariogramParams p{trial % 2 ? VariogramModel::kSpherical : VariogramModel::kExponential,
                                trial % 3 == 0 ? 0.0 : 0.5, r.uniform(5, 20), r.uniform(20, 120)};
    const KrigingSystem s(positions_of(samples), p);
    for (int t = 0; t < 20; ++t) {
      const Position2D target{r.uniform(-20, 220), r.uniform(-20, 220)};
      const auto w = kriging_weights(s, target);
      double sum = 0.0;
      for (double x : w.weights) sum += x;
      CHECK(std::abs(sum - 1.0) <= 1e-9);

      auto shifted = samples;
      for (auto& x : shifted) x.gain_db += 7.25;
      CHECK(kriging_predict(s, shifted, target) ==
            doctest::Approx(kriging_predict(s, samples, target) + 7.25).epsilon(1e-10));
    }
    if (p.a == 0.0) {
      for (const auto& x : samples) CHECK(std::abs(kriging_predict(s, samples, x.position) - x.gain_db) <= 1e-6);
    }
  }
}

TEST_CASE("kriging of a constant field is exact") {
  SeededRng r(6, Stream::kTest);
  auto samples = random_positions(r, 40, 100);
  for (auto& s : samples) s.gain_db = -81.5;
  const KrigingSystem sys(positions_of(samples), {VariogramModel::kExponential, 1.0, 8.0, 25.0});
  for (int t = 0; t < 20; ++t) {
    CHECK(kriging_predict(sys, samples, {r.uniform(0, 100), r.uniform(0, 100)}) ==
          doctest::Approx(-81.5).epsilon(1e-10));
  }
}

TEST_CASE("kriging of an affine field inside the hull") {
  // Lattice samples of Z = p + qx + ry; ordinary Kriging carries no trend
  // term, so affine reproduction relies on the sample geometry.
  const auto affine = [](const Position2D& x) { return -80.0 + 0.05 * x.x - 0.03 * x.y; };
  std::vector<ChannelSample> samples;
  for (int j = 0; j <= 10; ++j) {
    for (int i = 0; i <= 10; ++i) {
      const Position2D x{10.0 * i, 10.0 * j};
      samples.push_back({x, affine(x)});
    }
  }
  const KrigingSystem sys(positions_of(samples), {VariogramModel::kExponential, 1e-3, 10.0, 40.0});
  SeededRng r(7, Stream::kTest);
  for (int t = 0; t < 100; ++t) {
    const Position2D x{r.uniform(20, 80), r.uniform(20, 80)};
    CHECK(std::abs(kriging_predict(sys, samples, x) - affine(x)) <= 1e-3);
  }
}

TEST_CASE("batched solves match independent dense solves") {
  SeededRng r(8, Stream::kTest);
  const auto samples = random_positions(r, 300, 300);
  const SemivariogramParams p{VariogramModel::kExponential, 0.3, 16.0, 50.0};
  const KrigingSystem sys(positions_of(samples), p);
  const GridSpec spec = grid_for_region({0, 300, 0, 300}, 5.0);
  std::vector<Position2D> targets;
  for (std::size_t i = 0; i < spec.size(); ++i) targets.push_back(spec.node_position(i));
  REQUIRE(targets.size() == 3721);
  const Eigen::MatrixXd batch = sys.weights_batch(targets);
  REQUIRE(batch.cols() == 3721);

  // Rebuild the augmented matrix independently and solve a subset from scratch.
  const std::size_t n = sys.size();
  Eigen::MatrixXd a(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = i == j ? 0.0 : gamma_value(p, distance(samples[i].position, samples[j].position));
    }
    a(i, n) = 1.0;
    a(n, i) = 1.0;
  }
  a(n, n) = 0.0;
  double worst = 0.0;
  for (std::size_t t = 0; t < targets.size(); t += 97) {
    Eigen::VectorXd rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) rhs(i) = gamma_value(p, distance(samples[i].position, targets[t]));
    rhs(n) = 1.0;
    const Eigen::VectorXd direct = a.fullPivLu().solve(rhs);
    worst = std::max(worst, (direct.head(n) - batch.col(t).head(n)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-9);

  // The dual form used for whole-grid construction agrees with the weights.
  std::vector<double> values;
  for (const auto& s : samples) values.push_back(s.gain_db);
  const Eigen::VectorXd coef = sys.dual_coefficients(values);
  for (std::size_t t = 0; t < targets.size(); t += 211) {
    CHECK(sys.predict_dual(coef, targets[t]) ==
          doctest::Approx(kriging_predict(sys, samples, targets[t])).epsilon(1e-9));
  }
}

TEST_CASE("knn prediction") {
  const std::vector<ChannelSample> s{{{1, 0}, -60}, {{0, 1}, -70}, {{-1, 0}, -80}, {{0, -1}, -90}, {{5, 5}, -10}};
  CHECK(knn_predict(s, {0.9, 0.1}, 1) == -60);
  CHECK(knn_predict(s, {0, 0}, 2) == doctest::Approx(-65.0));
  CHECK(knn_predict(s, {0, 0}, 4) == doctest::Approx(-75.0));
  CHECK_THROWS(knn_predict(s, {0, 0}, 0));
  CHECK_THROWS(knn_predict(s, {0, 0}, 6));
  const std::vector<ChannelSample> same{{{1, 0}, -50}, {{3, 0}, -50}, {{9, 9}, -20}};
  CHECK(knn_predict(same, {0, 0}, 2) == -50);
}

TEST_CASE("line-of-sight model") {
  CHECK(los_model_predict({3, 4}, {3, 4}, -30.0, 50.0, 2.0) == doctest::Approx(-63.625).epsilon(1e-4));
  const double near = los_model_predict({30, 40}, {0, 0}, -30.0, 50.0, 50.0);
  const double far = los_model_predict({60, 80}, {0, 0}, -30.0, 50.0, 50.0);
  CHECK(near - far == doctest::Approx(6.0206).epsilon(1e-5));
  CHECK_THROWS(los_model_predict({0, 0}, {0, 0}, -30.0, 2.0, 2.0));
}

TEST_CASE("construct_ckm") {
  const GridSpec spec{0, 0, 10, 8, 7};
  SeededRng r(9, Stream::kShadowing);
  const GainGrid truth = gaussian_random_field(spec, 4.0, 30.0, r);
  std::vector<ChannelSample> all;
  for (std::size_t i = 0; i < spec.size(); ++i) all.push_back({spec.node_position(i), truth[i]});

  const GainGrid exact = construct_ckm(all, spec, KrigingMethod{{VariogramModel::kExponential, 0.0, 16.0, 30.0}, {}});
  for (std::size_t i = 0; i < spec.size(); ++i) CHECK(std::abs(exact[i] - truth[i]) <= 1e-6);

  double mean = 0.0;
  for (double v : truth.values()) mean += v;
  mean /= spec.size();
  const GainGrid knn = construct_ckm(all, spec, KnnMethod{all.size()});
  for (double v : knn.values()) CHECK(v == doctest::Approx(mean).epsilon(1e-12));

  const GainGrid local =
      construct_ckm(all, spec, KrigingMethod{{VariogramModel::kExponential, 0.0, 16.0, 30.0}, 12});
  for (std::size_t i = 0; i < spec.size(); ++i) CHECK(std::abs(local[i] - truth[i]) <= 1e-6);

  const GainGrid los = construct_ckm(all, spec, LosMethod{{35, 30}, -30.0, 50.0, 2.0});
  CHECK(los.at(0, 0) == doctest::Approx(los_model_predict({0, 0}, {35, 30}, -30.0, 50.0, 2.0)));
}

TEST_CASE("mean absolute error") {
  const GridSpec spec{0, 0, 1, 2, 2};
  const GainGrid a(spec, {1, 2, 3, 4});
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(GainGrid(spec, {1.5, 2.5, 3.5, 4.5}), a) == doctest::Approx(0.5));
  const GridSpec two{0, 0, 1, 2, 2};
  CHECK(mae(GainGrid(two, {2, -1, 3, 4}), a) == doctest::Approx((1.0 + 3.0) / 4.0));
  CHECK_THROWS(mae(a, GainGrid::constant(GridSpec{0, 0, 2, 2, 2}, 1.0)));
}

TEST_CASE("kriging beats knn on synthetic truth, 300 random samples") {
  const Rect region{-200, 100, -150, 150};
  const GridSpec spec = grid_for_region(region, 5.0);
  const GaussianFieldSampler sampler(spec, 4.0, 50.0);
  std::vector<double> kr, kn;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SeededRng lr(seed, Stream::kLayout);
    LayoutOptions opts;
    opts.keep_clear = {{-89.54, 16.30}};
    const auto layout = generate_layout(region, 12, lr, opts);
    SeededRng sr(seed, Stream::kShadowing);
    const GainGrid truth = generate_truth_ckm(layout, {-89.54, 16.30}, {}, TruthParams{}, sampler, sr);
    SeededRng pr(seed, Stream::kSampling);
    const auto samples = sample_random(truth, 300, pr);
    kr.push_back(mae(construct_kriging_ckm(samples, spec, VariogramModel::kExponential), truth));
    kn.push_back(mae(construct_ckm(samples, spec, KnnMethod{5}), truth));
  }
  std::sort(kr.begin(), kr.end());
  std::sort(kn.begin(), kn.end());
  const double mk = 0.5 * (kr[4] + kr[5]);
  const double mn = 0.5 * (kn[4] + kn[5]);
  MESSAGE("median MAE kriging " << mk << " dB, knn " << mn << " dB");
  CHECK(mk < mn);
}

}
