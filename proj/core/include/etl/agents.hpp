#pragma once

#include "etl/kstats.hpp"
#include "etl/learning.hpp"
#include "etl/predictor.hpp"
#include "etl/protocol.hpp"
#include "etl/triggers.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace etl {

struct EtlParams {
  StateTriggerConfig state{2.0};
  double eta = 0.05;
  int t_min = 18;
  TypeTriggerConfig type{5.0};
  LearningConfig learning;
  bool learning_enabled = true;  // false gives plain event-triggered estimation

  void validate() const;
  WireConfig wire(int state_dim = 1) const { return {state_dim, learning.degree + 1}; }
};

/// Why a learning event produced no model message.
enum class LearnOutcome : std::uint8_t {
  None,       // learning did not fire
  Small,
  Full,
  Raw,
  Deferred,   // not enough measurements yet; buffer kept
};

struct Diagnostics {
  std::int64_t k = 0;
  Vec x;
  Vec x_hat;
  double d = 0.0;
  double p = 1.0;
  bool gamma_state = false;
  bool gamma_learn = false;
  bool gamma_full = false;
  std::optional<double> fit_error;
  LearnOutcome outcome = LearnOutcome::None;
  std::int64_t values_sent = 0;  // cumulative
};

/// Sending agent: prediction, state trigger, inter-communication
/// statistics, learning trigger and hierarchical model learning, in the
/// order of the sender listing, once per sample.
class Sender {
 public:
  struct Step {
    std::vector<UpdateMessage> messages;  // state update first, then model
    Diagnostics diag;
  };

  Sender(SystemModel system, EtlParams params,
         std::shared_ptr<const HypotheticalCdf> hypothetical,
         PredictorState initial = {});

  Step step(const Vec& x);
  Step step(double x) { return step(scalar(x)); }

  const PredictorState& predictor() const { return predictor_; }
  const InterCommBuffer& buffer() const { return buffer_; }
  const LearnTriggerState& learn_state() const { return learn_; }
  const CommLedger& ledger() const { return ledger_; }
  const EtlParams& params() const { return params_; }
  std::span<const double> window() const;
  std::int64_t samples_seen() const { return k_; }

 private:
  double current_p();
  std::optional<UpdateMessage> learn(Diagnostics& diag);

  SystemModel system_;
  EtlParams params_;
  std::shared_ptr<const HypotheticalCdf> hypothetical_;
  PredictorState predictor_;
  InterCommBuffer buffer_;
  LearnTriggerState learn_;
  CommLedger ledger_;
  std::vector<double> window_;  // newest last; trimmed lazily
  std::size_t window_capacity_;
  std::int64_t k_ = 0;
  double cached_p_ = 1.0;
  bool p_dirty_ = true;
};

/// Receiving agent. Evolves only from received messages and its own
/// predictions; after each sample its predictor equals the sender's.
class Receiver {
 public:
  explicit Receiver(SystemModel system, PredictorState initial = {});

  /// Consumes the messages sent for the next sample (possibly none) and
  /// returns the estimate. Throws ProtocolError for messages that belong to
  /// another sample or arrive in an invalid order.
  Vec step(std::span<const UpdateMessage> messages);

  const PredictorState& predictor() const { return predictor_; }
  std::int64_t samples_seen() const { return k_; }

 private:
  SystemModel system_;
  PredictorState predictor_;
  std::int64_t k_ = 0;
};

}  // namespace etl
