#pragma once

#include "etl/dynamics.hpp"

namespace etl {

struct StateTriggerConfig {
  double delta = 2.0;
  void validate() const;
};

struct StateTriggerResult {
  bool gamma_state = false;
  double d = 0.0;
};

/// d = metric(x, x_pred); fires when d >= delta.
StateTriggerResult state_trigger(const SystemModel& system, const Vec& x, const Vec& x_pred,
                                 const StateTriggerConfig& cfg);

/// Holding-time state of the robust learning trigger. Fires once p < eta
/// has held for t_min + 1 consecutive samples (the closed window
/// [k - t_min, k]).
struct LearnTriggerState {
  double eta = 0.05;
  int t_min = 18;
  int below_count = 0;
  double last_p = 1.0;

  void validate() const;
};

/// Feeds one p-value. Returns gamma_learn; the counter restarts on firing.
bool learn_trigger(LearnTriggerState& state, double p);

struct TypeTriggerConfig {
  double alpha = 5.0;
  void validate() const;
};

/// Full update iff learning fired and the small-update fit error exceeds alpha.
bool type_trigger(bool gamma_learn, double fit_error, const TypeTriggerConfig& cfg);

}  // namespace etl
