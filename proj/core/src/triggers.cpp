#include "etl/triggers.hpp"

#include "etl/error.hpp"

#include <cmath>

namespace etl {

void StateTriggerConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be > 0");
}

StateTriggerResult state_trigger(const SystemModel& system, const Vec& x, const Vec& x_pred,
                                 const StateTriggerConfig& cfg) {
  const double d = system.metric(x, x_pred);
  return {d >= cfg.delta, d};
}

void LearnTriggerState::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (t_min < 0) throw ConfigError("t_min must be >= 0");
}

bool learn_trigger(LearnTriggerState& state, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p-value outside [0, 1]");
  state.last_p = p;
  if (p >= state.eta) {
    state.below_count = 0;
    return false;
  }
  ++state.below_count;
  if (state.below_count >= state.t_min + 1) {
    state.below_count = 0;
    return true;
  }
  return false;
}

void TypeTriggerConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
}

bool type_trigger(bool gamma_learn, double fit_error, const TypeTriggerConfig& cfg) {
  return gamma_learn && fit_error > cfg.alpha;
}

}  // namespace etl
