#pragma once

#include "etl/dynamics.hpp"
#include "etl/types.hpp"

#include <cstdint>
#include <optional>

namespace etl {

/// One cycle of the estimated excitation, m rows by N-hat columns.
struct ExcitationModel {
  Eigen::MatrixXd trajectory;
  std::uint64_t version = 0;

  int cycle_length() const { return static_cast<int>(trajectory.cols()); }
  int input_dim() const { return static_cast<int>(trajectory.rows()); }

  /// Column `j` (1-based) as an input vector.
  Vec column(int j) const { return trajectory.col(j - 1); }

  /// Scalar instance: the single row as a plain vector.
  std::vector<double> row(int r = 0) const;

  /// All-zero model; with length 1 the predictor holds its last estimate.
  static ExcitationModel zeros(int input_dim = 1, int cycle_length = 1);
  static ExcitationModel from_row(const std::vector<double>& values,
                                  std::uint64_t version = 0);
};

/// Prediction block state, kept identical on sender and receiver.
struct PredictorState {
  std::optional<Vec> x_hat;  // empty until the first state update
  int index = 1;             // j, always in [1, N-hat]
  bool reset_pending = false;  // gamma_learn of the previous sample
  ExcitationModel model = ExcitationModel::zeros();

  bool initialized() const { return x_hat.has_value(); }
};

/// Next column index. Returns 1 on wrap-around or when learning fired,
/// j + 1 otherwise. Throws StateCorruptionError if j is outside [1, N].
int advance_index(int j, int n_hat, bool gamma_learn);

/// Moves the index forward for the current sample and clears the pending
/// learning reset.
void advance(PredictorState& state);

/// f(x_hat, u_hat_j, 0). Requires an initialised estimate.
Vec predict(const SystemModel& system, const PredictorState& state);

/// Stores the measurement when gamma_state is set, the prediction otherwise.
/// Throws ProtocolError if gamma_state is set without a measurement.
void commit(PredictorState& state, const Vec& predicted,
            const std::optional<Vec>& measurement, bool gamma_state);

/// Replaces the model after a learning event: bumps the version and makes
/// the next advance() start the new trajectory at column 1.
void install_model(PredictorState& state, ExcitationModel model);

/// Bitwise comparison of estimate, index, reset flag and model.
bool bit_identical(const PredictorState& a, const PredictorState& b);

}  // namespace etl
