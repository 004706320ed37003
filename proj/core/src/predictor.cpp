#include "etl/predictor.hpp"

#include "etl/error.hpp"

#include <algorithm>
#include <string>

namespace etl {

std::vector<double> ExcitationModel::row(int r) const {
  std::vector<double> out(static_cast<std::size_t>(trajectory.cols()));
  for (Eigen::Index c = 0; c < trajectory.cols(); ++c) out[c] = trajectory(r, c);
  return out;
}

ExcitationModel ExcitationModel::zeros(int input_dim, int cycle_length) {
  if (input_dim < 1 || cycle_length < 1) throw ConfigError("model dimensions must be >= 1");
  return ExcitationModel{Eigen::MatrixXd::Zero(input_dim, cycle_length), 0};
}

ExcitationModel ExcitationModel::from_row(const std::vector<double>& values,
                                          std::uint64_t version) {
  if (values.empty()) throw ConfigError("model trajectory must not be empty");
  ExcitationModel m;
  m.trajectory.resize(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m.trajectory(0, i) = values[i];
  m.version = version;
  return m;
}

int advance_index(int j, int n_hat, bool gamma_learn) {
  if (n_hat < 1 || j < 1 || j > n_hat) {
    throw StateCorruptionError("trajectory index " + std::to_string(j) +
                               " outside [1, " + std::to_string(n_hat) + "]");
  }
  if (gamma_learn || j == n_hat) return 1;
  return j + 1;
}

void advance(PredictorState& state) {
  state.index = advance_index(state.index, state.model.cycle_length(), state.reset_pending);
  state.reset_pending = false;
}

Vec predict(const SystemModel& system, const PredictorState& state) {
  if (!state.x_hat) throw ProtocolError("prediction before the first state update");
  return system.step(*state.x_hat, state.model.column(state.index), system.zero_noise());
}

void commit(PredictorState& state, const Vec& predicted,
            const std::optional<Vec>& measurement, bool gamma_state) {
  if (gamma_state) {
    if (!measurement) throw ProtocolError("state update without a measurement");
    state.x_hat = *measurement;
  } else {
    state.x_hat = predicted;
  }
}

void install_model(PredictorState& state, ExcitationModel model) {
  if (model.cycle_length() < 1) throw ConfigError("model trajectory must not be empty");
  model.version = state.model.version + 1;
  state.model = std::move(model);
  state.index = std::min(state.index, state.model.cycle_length());
  state.reset_pending = true;
}

bool bit_identical(const PredictorState& a, const PredictorState& b) {
  if (a.index != b.index || a.reset_pending != b.reset_pending) return false;
  if (a.model.version != b.model.version) return false;
  if (a.x_hat.has_value() != b.x_hat.has_value()) return false;
  if (a.x_hat && !bit_equal(*a.x_hat, *b.x_hat)) return false;
  return bit_equal(a.model.trajectory, b.model.trajectory);
}

}  // namespace etl
