#pragma once

#include "etl/predictor.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace etl {

/// Knobs of the identification step. Windows are measured state
/// sequences in time order; the last element is the current sample.
struct LearningConfig {
  int degree = 18;          // compression polynomial degree
  int window_cycles = 3;    // cycles used for cycle-length estimation
  int lag_min = 20;         // admissible cycle lengths, samples
  int lag_max = 150;
  int refine_radius = 2;    // local grid half-width for both parameters
  double min_correlation = 0.3;  // autocorrelation floor for a cycle
  bool drift_compensation = true;

  void validate() const;
};

/// Small-update parameters of the gait instance: new cycle length and
/// circular shift, both in samples.
struct DeformParams {
  int cycle_length = 1;
  int shift = 0;

  void validate() const;
  std::array<double, 2> values() const {
    return {static_cast<double>(cycle_length), static_cast<double>(shift)};
  }
  friend bool operator==(const DeformParams&, const DeformParams&) = default;
};

/// Polynomial coefficients over the normalised cycle phase plus the cycle
/// length. Coefficients are in the Chebyshev basis on s = 2t - 1,
/// t_j = (j - 1) / (N - 1).
struct CompressedModel {
  std::vector<double> coefficients;
  int cycle_length = 0;

  std::size_t value_count() const { return coefficients.size() + 1; }
};

struct FitReport {
  double error = 0.0;  // E, RMSE over the evaluated cycle
  DeformParams theta;
  ExcitationModel candidate;
};

/// Lag of the highest interior autocorrelation peak of the increments.
/// Lags run up to half the window so each one is seen twice. The ends of
/// the lag range never count as peaks, except lag_max when the window
/// reaches past it.
///
/// Throws InsufficientDataError when no lag in range fits the window, and
/// NoCycleError when the best correlation is below the floor.
int estimate_cycle_length(std::span<const double> window, const LearningConfig& cfg);

/// Circular shift maximising the cross-covariance between the last
/// cycle's increments and the model warped to `n_plus`. Ties go to the
/// smaller shift; a flat model yields 0.
int estimate_shift(std::span<const double> window, const ExcitationModel& model, int n_plus);

/// Fit error of a candidate trajectory against the last `span` samples
/// (one candidate cycle when 0): the window is re-simulated open loop from
/// x[k - span] with the candidate applied periodically, and the residual
/// RMSE is returned. Drift compensation removes the best affine trend from
/// the residual first.
double fit_error(std::span<const double> window, const ExcitationModel& candidate,
                 bool drift_compensation = true, int span = 0);

/// Local grid search around `init`; never returns a larger error than the
/// error of `init`.
FitReport refine_params(std::span<const double> window, const ExcitationModel& model,
                        DeformParams init, const LearningConfig& cfg);

/// Time warp of the angle trajectory followed by a circular shift. The
/// cumulative sum of each row is resampled on the new grid by linear
/// interpolation and differenced, which keeps the per-cycle increment sum.
/// The identity parameters return the model unchanged.
ExcitationModel deform(const ExcitationModel& model, DeformParams theta);

/// Last N+ first differences of the window.
ExcitationModel identify_full(std::span<const double> window, int n_plus);

/// Least-squares polynomial fit of the (single-row) trajectory. Returns
/// nullopt when the raw trajectory should be sent instead: too few samples
/// for the degree, or a numerically rank-deficient fit.
std::optional<CompressedModel> compress(const ExcitationModel& model, int degree = 18);

/// Evaluates the polynomial on the N-point grid (Clenshaw recurrence, fixed
/// order, so every caller gets bit-identical output).
ExcitationModel reconstruct(const CompressedModel& cm);

/// Chebyshev design matrix for `n` grid points; exposed for tests.
Eigen::MatrixXd chebyshev_design(int n, int degree);

}  // namespace etl
