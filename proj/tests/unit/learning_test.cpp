#include "etl/dynamics.hpp"
#include "etl/error.hpp"
#include "etl/learning.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>

namespace etl {
namespace {

// States produced by integrating `cycle` periodically for `cycles` cycles
// from x0, plus optional Gaussian noise on each step.
std::vector<double> integrate(const std::vector<double>& cycle, int cycles, double x0 = 0.0,
                              double sigma = 0.0, std::uint32_t seed = 0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<double> x{x0};
  const int n = static_cast<int>(cycle.size());
  for (int k = 0; k < cycles * n; ++k) {
    x.push_back(x.back() + cycle[k % n] + (sigma > 0.0 ? noise(gen) : 0.0));
  }
  return x;
}

std::vector<double> rolled(const std::vector<double>& v, int s) {
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int j = 0; j < n; ++j) out[(j + s) % n] = v[j];
  return out;
}

std::vector<double> gait(int n, ExcitationShape shape = ExcitationShape::Gait) {
  return cycle_increments(shape, n, 30.0, 0.0);
}

// ---------------------------------------------------------------------------
// Cycle length

// Global argmax of the normalised autocorrelation of the increments over
// the lags seen at least twice in the window.
int brute_force_lag(const std::vector<double>& x, int lag_min, int lag_max) {
  std::vector<double> d;
  for (std::size_t k = 1; k < x.size(); ++k) d.push_back(x[k] - x[k - 1]);
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  for (double& v : d) v -= mean;
  const int hi = std::min<int>(lag_max, static_cast<int>(d.size()) / 2);
  int best = lag_min;
  double best_r = -2.0;
  for (int lag = lag_min; lag <= hi; ++lag) {
    const std::size_t m = d.size() - lag;
    const Eigen::Map<const Eigen::VectorXd> a(d.data(), static_cast<Eigen::Index>(m));
    const Eigen::Map<const Eigen::VectorXd> b(d.data() + lag, static_cast<Eigen::Index>(m));
    const double r = a.dot(b) / (a.norm() * b.norm());
    if (r > best_r) {
      best_r = r;
      best = lag;
    }
  }
  return best;
}

TEST(CycleLength, NoiseFreeSine) {
  const LearningConfig cfg;
  const auto x = integrate(gait(50, ExcitationShape::Sine), 3);
  EXPECT_EQ(estimate_cycle_length(x, cfg), 50);
  EXPECT_EQ(brute_force_lag(x, cfg.lag_min, cfg.lag_max), 50);
}

TEST(CycleLength, NoisySineWithinOne) {
  const LearningConfig cfg;
  for (std::uint32_t seed = 0; seed < 30; ++seed) {
    const auto x = integrate(gait(50, ExcitationShape::Sine), 3, 0.0, 0.9, seed);
    const int oracle = brute_force_lag(x, cfg.lag_min, cfg.lag_max);
    EXPECT_NEAR(estimate_cycle_length(x, cfg), 50, 1) << "seed " << seed;
    EXPECT_NEAR(oracle, 50, 1) << "seed " << seed;
  }
}

TEST(CycleLength, MatchesOracleAcrossShapesAndLengths) {
  const LearningConfig cfg;
  for (auto shape : {ExcitationShape::Gait, ExcitationShape::GaitDropFoot,
                     ExcitationShape::GaitStiffKnee, ExcitationShape::TwoHarmonic}) {
    for (int n : {30, 45, 50, 55, 70, 100}) {
      const auto x = integrate(gait(n, shape), 3, 5.0, 0.9, static_cast<std::uint32_t>(n));
      EXPECT_NEAR(estimate_cycle_length(x, cfg), n, 1) << to_string(shape) << " N " << n;
    }
  }
}

TEST(CycleLength, ConstantSignalHasNoCycle) {
  const LearningConfig cfg;
  EXPECT_THROW(estimate_cycle_length(std::vector<double>(200, 3.0), cfg), NoCycleError);
}

TEST(CycleLength, WhiteNoiseHasNoCycle) {
  const LearningConfig cfg;
  std::mt19937 gen(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(400);
  double v = 0.0;
  for (double& xi : x) xi = v += noise(gen);
  EXPECT_THROW(estimate_cycle_length(x, cfg), NoCycleError);
}

TEST(CycleLength, ShortWindowIsInsufficient) {
  const LearningConfig cfg;
  EXPECT_THROW(estimate_cycle_length(std::vector<double>(30, 0.0), cfg), InsufficientDataError);
}

// ---------------------------------------------------------------------------
// Shift

int exhaustive_shift(const std::vector<double>& window, const std::vector<double>& cycle) {
  const int n = static_cast<int>(cycle.size());
  std::vector<double> last;
  for (std::size_t k = window.size() - n; k < window.size(); ++k) last.push_back(window[k] - window[k - 1]);
  int best = 0;
  double best_err = 1e300;
  for (int s = 0; s < n; ++s) {
    const auto r = rolled(cycle, s);
    double e = 0.0;
    for (int j = 0; j < n; ++j) e += (last[j] - r[j]) * (last[j] - r[j]);
    if (e < best_err - 1e-12) {
      best_err = e;
      best = s;
    }
  }
  return best;
}

TEST(Shift, RecoversKnownShift) {
  const auto cycle = gait(50);
  const auto model = ExcitationModel::from_row(cycle);
  for (int s : {0, 7, 23, 49}) {
    const auto x = integrate(rolled(cycle, s), 3);
    EXPECT_EQ(exhaustive_shift(x, cycle), s);
    EXPECT_EQ(estimate_shift(x, model, 50), s);
  }
}

TEST(Shift, ZeroModelGivesZero) {
  const auto x = integrate(gait(50), 3);
  EXPECT_EQ(estimate_shift(x, ExcitationModel::zeros(1, 50), 50), 0);
  EXPECT_EQ(estimate_shift(x, ExcitationModel::zeros(), 50), 0);
}

TEST(Shift, Errors) {
  const auto model = ExcitationModel::from_row(gait(50));
  EXPECT_THROW(estimate_shift(std::vector<double>(10, 0.0), model, 50), InsufficientDataError);
  EXPECT_THROW(estimate_shift(std::vector<double>(100, 0.0), model, 0), ConfigError);
}

// ---------------------------------------------------------------------------
// Fit error and refinement

// Open-loop re-simulation over the last `span` samples with the candidate
// applied periodically so that its column 1 follows the window, then the
// RMSE of the residual after removing its least-squares line.
double fit_error_oracle(const std::vector<double>& w, const std::vector<double>& cand, int span) {
  const int p = static_cast<int>(cand.size());
  const std::size_t start = w.size() - span - 1;
  Eigen::VectorXd r(span);
  double x = w[start];
  for (int j = 0; j < span; ++j) {
    const int col = ((j - span) % p + p) % p;
    x += cand[col];
    r[j] = w[start + 1 + j] - x;
  }
  Eigen::MatrixXd a(span, 2);
  for (int j = 0; j < span; ++j) {
    a(j, 0) = 1.0;
    a(j, 1) = j;
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(r);
  const Eigen::VectorXd res = r - a * coef;
  return std::sqrt(res.squaredNorm() / span);
}

TEST(FitError, MatchesOracle) {
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(200);
    for (double& v : w) v = uni(gen) * 10;
    const int p = 20 + t;
    std::vector<double> cand(static_cast<std::size_t>(p));
    for (double& v : cand) v = uni(gen);
    const int span = 40 + t;
    EXPECT_NEAR(fit_error(w, ExcitationModel::from_row(cand), true, span),
                fit_error_oracle(w, cand, span), 1e-9);
    EXPECT_NEAR(fit_error(w, ExcitationModel::from_row(cand), true, 0),
                fit_error_oracle(w, cand, p), 1e-9);
  }
}

TEST(FitError, ExactModelWithDriftIsZero) {
  const auto cycle = gait(50);
  auto x = integrate(cycle, 3);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += 0.3 * static_cast<double>(k) - 4.0;
  EXPECT_NEAR(fit_error(x, ExcitationModel::from_row(cycle)), 0.0, 1e-9);
  EXPECT_GT(fit_error(x, ExcitationModel::from_row(cycle), false), 1.0);
}

TEST(FitError, ShortWindowIsInsufficient) {
  EXPECT_THROW(fit_error(std::vector<double>(10, 0.0), ExcitationModel::zeros(1, 20)),
               InsufficientDataError);
}

TEST(Refine, ExactWarpIsFound) {
  const LearningConfig cfg;
  const auto model = ExcitationModel::from_row(gait(50));
  for (int s : {0, 11, 40}) {
    const auto target = deform(model, {55, s});
    const auto x = integrate(target.row(), 3, 2.0);
    const int n_plus = estimate_cycle_length(x, cfg);
    const int shift = estimate_shift(x, model, n_plus);
    const auto report = refine_params(x, model, {n_plus, shift}, cfg);
    EXPECT_EQ(report.theta, (DeformParams{55, s}));
    EXPECT_NEAR(report.error, 0.0, 1e-9);
  }
}

TEST(Refine, NearbyStartConverges) {
  const LearningConfig cfg;
  const auto model = ExcitationModel::from_row(gait(50));
  const auto x = integrate(deform(model, {55, 9}).row(), 3);
  const auto report = refine_params(x, model, {54, 8}, cfg);
  EXPECT_EQ(report.theta, (DeformParams{55, 9}));
  EXPECT_NEAR(report.error, 0.0, 1e-9);
}

TEST(Refine, ShapeChangeExceedsAlpha) {
  const LearningConfig cfg;
  const auto model = ExcitationModel::from_row(gait(50));
  for (auto shape : {ExcitationShape::GaitStiffKnee, ExcitationShape::GaitDragged}) {
    const auto x = integrate(gait(50, shape), 3);
    const int shift = estimate_shift(x, model, 50);
    const auto report = refine_params(x, model, {50, shift}, cfg);
    EXPECT_GT(report.error, 5.0) << to_string(shape);
    EXPECT_NEAR(report.error, fit_error_oracle(x, report.candidate.row(), 50), 1e-9);
  }
}

TEST(Refine, OptimalStartIsKept) {
  const LearningConfig cfg;
  const auto model = ExcitationModel::from_row(gait(50));
  const auto x = integrate(deform(model, {52, 3}).row(), 3);
  const auto report = refine_params(x, model, {52, 3}, cfg);
  EXPECT_EQ(report.theta, (DeformParams{52, 3}));
}

TEST(Refine, NeverWorseThanStart) {
  const LearningConfig cfg;
  std::mt19937 gen(31);
  std::uniform_int_distribution<int> len(40, 70);
  std::normal_distribution<double> noise(0.0, 0.9);
  for (int t = 0; t < 40; ++t) {
    const int n_model = len(gen);
    const int n_true = len(gen);
    const auto model = ExcitationModel::from_row(gait(n_model, ExcitationShape::GaitDropFoot));
    const auto x = integrate(gait(n_true), 3, 0.0, 0.9, static_cast<std::uint32_t>(t));
    std::uniform_int_distribution<int> sh(0, n_true - 1);
    const DeformParams init{n_true, sh(gen)};
    const auto report = refine_params(x, model, init, cfg);
    EXPECT_LE(report.error, fit_error(x, deform(model, init), true, init.cycle_length) + 1e-12);
  }
}

TEST(Refine, Errors) {
  const LearningConfig cfg;
  const auto model = ExcitationModel::from_row(gait(50));
  EXPECT_THROW(refine_params(std::vector<double>(30, 0.0), model, {50, 0}, cfg),
               InsufficientDataError);
  EXPECT_THROW(refine_params(std::vector<double>(300, 0.0), model, {50, 50}, cfg), ConfigError);
}

// ---------------------------------------------------------------------------
// Deformation

TEST(Deform, IdentityLeavesModel) {
  const auto model = ExcitationModel::from_row(gait(47));
  const auto out = deform(model, {47, 0});
  EXPECT_TRUE(bit_equal(out.trajectory, model.trajectory));
}

TEST(Deform, PureShift) {
  const auto out = deform(ExcitationModel::from_row({1, 2, 3}), {3, 1});
  EXPECT_EQ(out.row(), (std::vector<double>{3, 1, 2}));
}

TEST(Deform, StretchKeepsSum) {
  const auto out = deform(ExcitationModel::from_row({2, 4}), {4, 0});
  ASSERT_EQ(out.cycle_length(), 4);
  // Cumulative angle 0, 2, 6 at phases 0, 1/2, 1, sampled at quarters.
  const std::vector<double> cum{0.0, 1.0, 2.0, 4.0, 6.0};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(out.row()[j], cum[j + 1] - cum[j], 1e-15);
  const auto r = out.row();
  EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 6.0, 1e-15);
}

TEST(Deform, PreservesCycleSum) {
  std::mt19937 gen(13);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  std::uniform_int_distribution<int> len(1, 160);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> row(static_cast<std::size_t>(len(gen)));
    for (double& v : row) v = uni(gen);
    const int n = len(gen);
    std::uniform_int_distribution<int> sh(0, n - 1);
    const auto out = deform(ExcitationModel::from_row(row), {n, sh(gen)}).row();
    const double before = std::accumulate(row.begin(), row.end(), 0.0);
    const double after = std::accumulate(out.begin(), out.end(), 0.0);
    double scale = 0.0;
    for (double v : row) scale += std::abs(v);
    EXPECT_NEAR(after, before, 1e-9 * std::max(1.0, scale));
  }
}

TEST(Deform, InvalidParameters) {
  const auto model = ExcitationModel::from_row({1, 2, 3});
  EXPECT_THROW(deform(model, {0, 0}), ConfigError);
  EXPECT_THROW(deform(model, {3, 3}), ConfigError);
  EXPECT_THROW(deform(model, {3, -1}), ConfigError);
}

// ---------------------------------------------------------------------------
// Full identification

TEST(IdentifyFull, FirstDifferences) {
  EXPECT_EQ(identify_full(std::vector<double>{0, 1, 3, 6}, 3).row(), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(identify_full(std::vector<double>{9, 9, 0, 1, 3, 6}, 3).row(),
            (std::vector<double>{1, 2, 3}));
  for (double v : identify_full(std::vector<double>(60, 2.5), 50).row()) EXPECT_EQ(v, 0.0);
}

TEST(IdentifyFull, RecoversScenarioExcitation) {
  ScenarioConfig c;
  c.noise_sigma = 0.0;
  c.segments = {{200, 50, ExcitationShape::Gait, 30.0, 0.0}};
  const auto s = generate_scenario(c);
  const auto u_hat = identify_full(states_of(s), 50).row();
  for (int j = 0; j < 50; ++j) EXPECT_NEAR(u_hat[j], s[150 + j].u, 1e-12);
}

// Re-simulating the identified trajectory from the first state of the
// last cycle reproduces the window.
TEST(IdentifyFull, Telescopes) {
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> uni(-50.0, 50.0);
  for (int n : {1, 5, 20, 64}) {
    std::vector<double> w(static_cast<std::size_t>(n + 10));
    for (double& v : w) v = uni(gen);
    const auto u = identify_full(w, n).row();
    double x = w[w.size() - n - 1];
    for (int j = 0; j < n; ++j) {
      x += u[j];
      EXPECT_NEAR(x, w[w.size() - n + j], 1e-12);
    }
  }
}

TEST(IdentifyFull, Errors) {
  EXPECT_THROW(identify_full(std::vector<double>{0, 1, 2}, 3), InsufficientDataError);
  EXPECT_THROW(identify_full(std::vector<double>{0, 1, 2}, 0), ConfigError);
}

// ---------------------------------------------------------------------------
// Compression

// T_d(s) = cos(d acos s) on the normalised grid.
Eigen::MatrixXd chebyshev_oracle(int n, int degree) {
  Eigen::MatrixXd a(n, degree + 1);
  for (int j = 0; j < n; ++j) {
    const double s = std::clamp(2.0 * j / (n - 1) - 1.0, -1.0, 1.0);
    for (int d = 0; d <= degree; ++d) a(j, d) = std::cos(d * std::acos(s));
  }
  return a;
}

TEST(Compress, DesignMatchesChebyshevPolynomials) {
  for (int n : {20, 37, 150}) {
    EXPECT_LT((chebyshev_design(n, 18) - chebyshev_oracle(n, 18)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Compress, ConstantTrajectory) {
  const auto cm = compress(ExcitationModel::from_row(std::vector<double>(40, 1.75)));
  ASSERT_TRUE(cm.has_value());
  ASSERT_EQ(cm->coefficients.size(), 19u);
  EXPECT_EQ(cm->cycle_length, 40);
  EXPECT_EQ(cm->value_count(), 20u);
  EXPECT_NEAR(cm->coefficients[0], 1.75, 1e-12);
  for (std::size_t d = 1; d < 19; ++d) EXPECT_NEAR(cm->coefficients[d], 0.0, 1e-12);
}

TEST(Compress, PolynomialsAreExact) {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 18);
  for (int n : {20, 37, 50, 55, 64, 100, 150}) {
    for (int t = 0; t < 10; ++t) {
      const int d = deg(gen);
      std::vector<double> c(static_cast<std::size_t>(d) + 1);
      for (double& v : c) v = uni(gen);
      std::vector<double> row(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        const double tj = static_cast<double>(j) / (n - 1);
        double p = 0.0;
        for (int e = d; e >= 0; --e) p = p * tj + c[static_cast<std::size_t>(e)];
        row[static_cast<std::size_t>(j)] = p;
      }
      const auto cm = compress(ExcitationModel::from_row(row));
      ASSERT_TRUE(cm.has_value());
      const auto back = reconstruct(*cm).row();
      double err = 0.0;
      double scale = 0.0;
      for (int j = 0; j < n; ++j) {
        err = std::max(err, std::abs(back[j] - row[j]));
        scale = std::max(scale, std::abs(row[j]));
      }
      EXPECT_LE(err, 1e-6 * std::max(scale, 1e-12)) << "N " << n << " degree " << d;
    }
  }
}

TEST(Compress, GaitCycleFitsAgainstNormalEquations) {
  const int n = 60;
  const auto u = gait(n);
  const auto cm = compress(ExcitationModel::from_row(u));
  ASSERT_TRUE(cm.has_value());
  const auto back = reconstruct(*cm).row();

  const Eigen::MatrixXd a = chebyshev_oracle(n, 18);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(u.data(), n);
  const Eigen::VectorXd coef = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  const Eigen::VectorXd fit = a * coef;

  double sq = 0.0;
  for (int j = 0; j < n; ++j) {
    EXPECT_NEAR(back[j], fit[j], 1e-6);
    sq += (back[j] - u[j]) * (back[j] - u[j]);
  }
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  EXPECT_LT(std::sqrt(sq / n), 0.1 * (*hi - *lo));
}

TEST(Compress, RoundTripDegreeFive) {
  const int n = 45;
  std::vector<double> row(n);
  for (int j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / (n - 1);
    row[j] = 1.0 - 2.0 * t + 0.5 * t * t * t - 3.0 * std::pow(t, 5);
  }
  const auto back = reconstruct(*compress(ExcitationModel::from_row(row))).row();
  for (int j = 0; j < n; ++j) EXPECT_NEAR(back[j], row[j], 1e-6);
}

TEST(Compress, ZeroCoefficientsGiveZeros) {
  const auto m = reconstruct({std::vector<double>(19, 0.0), 33});
  EXPECT_EQ(m.cycle_length(), 33);
  for (double v : m.row()) EXPECT_EQ(v, 0.0);
}

TEST(Compress, ReconstructIsDeterministic) {
  const auto cm = *compress(ExcitationModel::from_row(gait(73)));
  EXPECT_TRUE(bit_equal(reconstruct(cm).trajectory, reconstruct(cm).trajectory));
}

TEST(Compress, Idempotent) {
  for (int n : {20, 50, 150}) {
    const auto c1 = *compress(ExcitationModel::from_row(gait(n, ExcitationShape::GaitDragged)));
    const auto c2 = *compress(reconstruct(c1));
    double scale = 0.0;
    for (double v : c1.coefficients) scale = std::max(scale, std::abs(v));
    for (std::size_t d = 0; d < c1.coefficients.size(); ++d) {
      EXPECT_NEAR(c2.coefficients[d], c1.coefficients[d], 1e-9 * scale) << "N " << n << " d " << d;
    }
  }
}

TEST(Compress, ShortCyclesAreSentRaw) {
  EXPECT_FALSE(compress(ExcitationModel::from_row(gait(19))).has_value());
  EXPECT_TRUE(compress(ExcitationModel::from_row(gait(20))).has_value());
  EXPECT_TRUE(compress(ExcitationModel::from_row(gait(19)), 5).has_value());
}

TEST(Compress, Errors) {
  EXPECT_THROW(compress(ExcitationModel::zeros(2, 40)), ConfigError);
  EXPECT_THROW(compress(ExcitationModel::from_row(gait(40)), -1), ConfigError);
  EXPECT_THROW(reconstruct({{}, 10}), ConfigError);
  EXPECT_THROW(reconstruct({{1.0}, 0}), ConfigError);
}

}  // namespace
}  // namespace etl
