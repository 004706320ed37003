#include "etl/learning.hpp"

#include "etl/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <string>

namespace etl {

void LearningConfig::validate() const {
  if (degree < 0) throw ConfigError("polynomial degree must be >= 0");
  if (window_cycles < 1) throw ConfigError("estimation window must cover >= 1 cycle");
  if (lag_min < 2 || lag_max < lag_min) throw ConfigError("invalid lag range");
  if (refine_radius < 0) throw ConfigError("refine radius must be >= 0");
}

void DeformParams::validate() const {
  if (cycle_length < 1) throw ConfigError("deformed cycle length must be >= 1");
  if (shift < 0 || shift >= cycle_length) {
    throw ConfigError("shift must lie in [0, cycle length)");
  }
}

namespace {

std::vector<double> increments(std::span<const double> window) {
  std::vector<double> d;
  if (window.size() < 2) return d;
  d.reserve(window.size() - 1);
  for (std::size_t i = 1; i < window.size(); ++i) d.push_back(window[i] - window[i - 1]);
  return d;
}

int positive_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

int estimate_cycle_length(std::span<const double> window, const LearningConfig& cfg) {
  std::vector<double> d = increments(window);
  const int len = static_cast<int>(d.size());
  // Every admissible lag is covered at least twice by the window.
  const int hi = std::min(cfg.lag_max, len / 2);
  if (hi < cfg.lag_min) {
    throw InsufficientDataError("window of " + std::to_string(window.size()) +
                                " samples is too short for cycle estimation");
  }
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= len;
  for (double& v : d) v -= mean;

  const int count = hi - cfg.lag_min + 1;
  std::vector<double> r(static_cast<std::size_t>(count), 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = cfg.lag_min; lag <= hi; ++lag) {
    double cross = 0.0;
    double e0 = 0.0;
    double e1 = 0.0;
    for (int t = 0; t + lag < len; ++t) {
      cross += d[t] * d[t + lag];
      e0 += d[t] * d[t];
      e1 += d[t + lag] * d[t + lag];
    }
    const double denom = std::sqrt(e0 * e1);
    const double value = denom > 0.0 ? cross / denom : 0.0;
    r[lag - cfg.lag_min] = value;
    best = std::max(best, value);
  }
  if (!(best >= cfg.min_correlation)) {
    throw NoCycleError("no autocorrelation peak above the noise floor");
  }

  const bool data_limited = hi < cfg.lag_max;
  int peak = -1;
  for (int idx = 0; idx < count; ++idx) {
    const double v = r[idx];
    if (v < cfg.min_correlation || (peak >= 0 && v <= r[peak])) continue;
    // Range ends are not peaks, except lag_max when the data reaches past it.
    const bool left_ok = idx > 0 && v >= r[idx - 1];
    bool right_ok = true;
    if (idx + 1 < count) {
      right_ok = v >= r[idx + 1];
    } else if (data_limited) {
      right_ok = false;
    }
    if (left_ok && right_ok) peak = idx;
  }
  if (peak >= 0) return cfg.lag_min + peak;
  throw NoCycleError("autocorrelation has no interior peak in the lag range");
}

int estimate_shift(std::span<const double> window, const ExcitationModel& model, int n_plus) {
  if (n_plus < 1) throw ConfigError("cycle length must be >= 1");
  if (static_cast<int>(window.size()) < n_plus + 1) {
    throw InsufficientDataError("window shorter than one cycle");
  }
  const auto tail = window.subspan(window.size() - static_cast<std::size_t>(n_plus) - 1);
  std::vector<double> measured = increments(tail);
  double mean = 0.0;
  for (double v : measured) mean += v;
  mean /= n_plus;
  for (double& v : measured) v -= mean;

  const ExcitationModel warped = deform(model, {n_plus, 0});
  const auto w = warped.row(0);
  int best_shift = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_plus; ++s) {
    double score = 0.0;
    for (int j = 0; j < n_plus; ++j) score += measured[j] * w[positive_mod(j - s, n_plus)];
    if (score > best) {
      best = score;
      best_shift = s;
    }
  }
  return best_shift;
}

double fit_error(std::span<const double> window, const ExcitationModel& candidate,
                 bool drift_compensation, int span) {
  const int period = candidate.cycle_length();
  const int n = span > 0 ? span : period;
  if (static_cast<int>(window.size()) < n + 1) {
    throw InsufficientDataError("window shorter than the evaluated span");
  }
  const std::size_t start = window.size() - static_cast<std::size_t>(n) - 1;
  // Column 1 of the candidate belongs to the sample after the window.
  const int first = positive_mod(period - n, period);
  std::vector<double> residual(static_cast<std::size_t>(n));
  double x = window[start];
  for (int j = 0; j < n; ++j) {
    x = x + candidate.trajectory(0, (first + j) % period);
    residual[j] = window[start + 1 + j] - x;
  }

  if (drift_compensation && n >= 3) {
    // Least-squares fit of a + b * j, removed from the residual.
    double sj = 0.0, sjj = 0.0, sr = 0.0, sjr = 0.0;
    for (int j = 0; j < n; ++j) {
      sj += j;
      sjj += static_cast<double>(j) * j;
      sr += residual[j];
      sjr += j * residual[j];
    }
    const double det = n * sjj - sj * sj;
    const double b = (n * sjr - sj * sr) / det;
    const double a = (sr - b * sj) / n;
    for (int j = 0; j < n; ++j) residual[j] -= a + b * j;
  }

  double sq = 0.0;
  for (double r : residual) sq += r * r;
  return std::sqrt(sq / n);
}

FitReport refine_params(std::span<const double> window, const ExcitationModel& model,
                        DeformParams init, const LearningConfig& cfg) {
  init.validate();
  const int available = static_cast<int>(window.size()) - 1;
  if (init.cycle_length > available) {
    throw InsufficientDataError("window shorter than the initial cycle length");
  }

  FitReport best;
  best.theta = init;
  best.candidate = deform(model, init);
  // Every candidate is scored on the span of the initial cycle length.
  const int span = init.cycle_length;
  best.error = fit_error(window, best.candidate, cfg.drift_compensation, span);

  const int r = cfg.refine_radius;
  for (int n = init.cycle_length - r; n <= init.cycle_length + r; ++n) {
    if (n < 1 || n > available) continue;
    const int centre = n == init.cycle_length ? init.shift : estimate_shift(window, model, n);
    for (int ds = -r; ds <= r; ++ds) {
      const DeformParams theta{n, positive_mod(centre + ds, n)};
      if (theta == init) continue;
      ExcitationModel candidate = deform(model, theta);
      const double e = fit_error(window, candidate, cfg.drift_compensation, span);
      if (e < best.error) {
        best.error = e;
        best.theta = theta;
        best.candidate = std::move(candidate);
      }
    }
  }
  return best;
}

ExcitationModel deform(const ExcitationModel& model, DeformParams theta) {
  theta.validate();
  const int n_old = model.cycle_length();
  const int n_new = theta.cycle_length;
  const Eigen::Index rows = model.trajectory.rows();

  Eigen::MatrixXd warped;
  if (n_new == n_old) {
    warped = model.trajectory;
  } else {
    warped.resize(rows, n_new);
    std::vector<double> cumulative(static_cast<std::size_t>(n_old) + 1);
    for (Eigen::Index row = 0; row < rows; ++row) {
      cumulative[0] = 0.0;
      for (int i = 0; i < n_old; ++i) cumulative[i + 1] = cumulative[i] + model.trajectory(row, i);
      auto at = [&](std::int64_t num) {
        // C(num / n_new * n_old) with exact integer positions at the ends.
        const std::int64_t scaled = num * n_old;
        const std::int64_t whole = scaled / n_new;
        const double frac = static_cast<double>(scaled % n_new) / n_new;
        if (frac == 0.0) return cumulative[static_cast<std::size_t>(whole)];
        const double lo = cumulative[static_cast<std::size_t>(whole)];
        const double hi = cumulative[static_cast<std::size_t>(whole) + 1];
        return lo + frac * (hi - lo);
      };
      double prev = at(0);
      for (int j = 0; j < n_new; ++j) {
        const double next = at(j + 1);
        warped(row, j) = next - prev;
        prev = next;
      }
    }
  }

  if (theta.shift == 0) return ExcitationModel{std::move(warped), model.version};
  Eigen::MatrixXd shifted(rows, n_new);
  for (int j = 0; j < n_new; ++j) shifted.col((j + theta.shift) % n_new) = warped.col(j);
  return ExcitationModel{std::move(shifted), model.version};
}

ExcitationModel identify_full(std::span<const double> window, int n_plus) {
  if (n_plus < 1) throw ConfigError("cycle length must be >= 1");
  if (static_cast<int>(window.size()) < n_plus + 1) {
    throw InsufficientDataError("full identification needs N+1 samples");
  }
  const auto tail = window.subspan(window.size() - static_cast<std::size_t>(n_plus) - 1);
  return ExcitationModel::from_row(increments(tail));
}

Eigen::MatrixXd chebyshev_design(int n, int degree) {
  Eigen::MatrixXd a(n, degree + 1);
  for (int j = 0; j < n; ++j) {
    const double t = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
    const double s = 2.0 * t - 1.0;
    a(j, 0) = 1.0;
    if (degree >= 1) a(j, 1) = s;
    for (int d = 2; d <= degree; ++d) a(j, d) = 2.0 * s * a(j, d - 1) - a(j, d - 2);
  }
  return a;
}

std::optional<CompressedModel> compress(const ExcitationModel& model, int degree) {
  if (model.input_dim() != 1) throw ConfigError("compression supports single-row models");
  const int n = model.cycle_length();
  if (degree < 0) throw ConfigError("polynomial degree must be >= 0");
  if (n < degree + 2) return std::nullopt;

  const Eigen::MatrixXd a = chebyshev_design(n, degree);
  const Eigen::VectorXd y = model.trajectory.row(0).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const auto r = qr.matrixR().diagonal().cwiseAbs();
  if (qr.rank() < degree + 1 || r.minCoeff() <= 1e-12 * r.maxCoeff()) return std::nullopt;
  const Eigen::VectorXd c = qr.solve(y);
  if (!c.allFinite()) return std::nullopt;

  CompressedModel cm;
  cm.cycle_length = n;
  cm.coefficients.assign(c.data(), c.data() + c.size());
  return cm;
}

ExcitationModel reconstruct(const CompressedModel& cm) {
  if (cm.cycle_length < 1) throw ConfigError("compressed model needs a cycle length >= 1");
  if (cm.coefficients.empty()) throw ConfigError("compressed model has no coefficients");
  const int n = cm.cycle_length;
  const int deg = static_cast<int>(cm.coefficients.size()) - 1;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double t = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
    const double s = 2.0 * t - 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (int d = deg; d >= 1; --d) {
      const double b0 = cm.coefficients[d] + 2.0 * s * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    values[j] = cm.coefficients[0] + s * b1 - b2;
  }
  return ExcitationModel::from_row(values);
}

}  // namespace etl
