#include "etl/agents.hpp"

#include "etl/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace etl {

void EtlParams::validate() const {
  state.validate();
  LearnTriggerState{eta, t_min}.validate();
  type.validate();
  learning.validate();
}

Sender::Sender(SystemModel system, EtlParams params,
               std::shared_ptr<const HypotheticalCdf> hypothetical, PredictorState initial)
    : system_(std::move(system)),
      params_(params),
      hypothetical_(std::move(hypothetical)),
      predictor_(std::move(initial)),
      learn_{params.eta, params.t_min},
      window_capacity_(static_cast<std::size_t>(params.learning.window_cycles) *
                           static_cast<std::size_t>(params.learning.lag_max) +
                       1) {
  params_.validate();
  if (params_.learning_enabled && !hypothetical_) {
    throw ConfigError("learning requires a hypothetical inter-communication CDF");
  }
  if (predictor_.model.input_dim() != system_.input_dim) {
    throw ConfigError("model rows do not match the system input dimension");
  }
  buffer_.anchored = predictor_.initialized();
  ledger_.state_dim = system_.state_dim;
  ledger_.model_values = params_.learning.degree + 2;
  window_.reserve(2 * window_capacity_);
}

std::span<const double> Sender::window() const {
  const std::size_t n = std::min(window_.size(), window_capacity_);
  return std::span<const double>(window_).subspan(window_.size() - n);
}

double Sender::current_p() {
  // p only changes when an inter-communication time is added or the
  // buffer is emptied.
  if (p_dirty_) {
    cached_p_ = ks_one_sided(buffer_.times, *hypothetical_).p;
    p_dirty_ = false;
  }
  return cached_p_;
}

Sender::Step Sender::step(const Vec& x) {
  if (x.size() != system_.state_dim) throw ConfigError("measurement dimension mismatch");
  if (k_ > std::numeric_limits<std::uint32_t>::max()) {
    throw ProtocolError("sample index exceeds the wire format range");
  }
  Step out;
  Diagnostics& diag = out.diag;
  diag.k = k_;
  diag.x = x;

  advance(predictor_);
  if (predictor_.initialized()) {
    const Vec predicted = predict(system_, predictor_);
    const auto trig = state_trigger(system_, x, predicted, params_.state);
    diag.d = trig.d;
    diag.gamma_state = trig.gamma_state;
    commit(predictor_, predicted, x, trig.gamma_state);
  } else {
    diag.d = std::numeric_limits<double>::infinity();
    diag.gamma_state = true;
    commit(predictor_, x, x, true);
  }
  record_sample(buffer_, diag.gamma_state);
  p_dirty_ = p_dirty_ || diag.gamma_state;
  if (diag.gamma_state) {
    out.messages.push_back({static_cast<std::uint32_t>(k_), StateUpdate{x}});
  }

  if (params_.learning_enabled) {
    diag.p = current_p();
    diag.gamma_learn = learn_trigger(learn_, diag.p);
  }

  window_.push_back(x[0]);
  if (window_.size() >= 2 * window_capacity_) {
    window_.erase(window_.begin(),
                  window_.begin() + static_cast<std::ptrdiff_t>(window_.size() - window_capacity_));
  }

  if (diag.gamma_learn) {
    if (auto msg = learn(diag)) out.messages.push_back(std::move(*msg));
  }

  for (const auto& msg : out.messages) ledger_.record(msg);
  ledger_.tick();
  diag.x_hat = *predictor_.x_hat;
  diag.values_sent = ledger_.values_sent;
  ++k_;
  return out;
}

std::optional<UpdateMessage> Sender::learn(Diagnostics& diag) {
  const auto& cfg = params_.learning;
  const auto w = window();
  const ExcitationModel& model = predictor_.model;
  const int n_hat = model.cycle_length();
  const auto k = static_cast<std::uint32_t>(k_);

  // Cycle estimation looks at window_cycles cycles of the current model, or
  // at everything stored while the model has no plausible cycle length.
  const bool n_hat_plausible = n_hat >= cfg.lag_min && n_hat <= cfg.lag_max;
  const std::size_t est_len =
      n_hat_plausible ? static_cast<std::size_t>(cfg.window_cycles) * static_cast<std::size_t>(n_hat)
                      : w.size();
  if (w.size() < est_len) {
    diag.outcome = LearnOutcome::Deferred;
    return std::nullopt;
  }
  const auto est_window = w.subspan(w.size() - est_len);

  auto estimate = [&cfg](std::span<const double> span) -> std::optional<int> {
    try {
      return estimate_cycle_length(span, cfg);
    } catch (const InsufficientDataError&) {
    } catch (const NoCycleError&) {
    }
    return std::nullopt;
  };
  std::optional<int> n_plus = estimate(est_window);
  if (!n_plus && est_window.size() < w.size()) n_plus = estimate(w);

  ExcitationModel next;
  std::optional<UpdateMessage> msg;
  auto full_update = [&](int n) {
    const ExcitationModel raw = identify_full(w, n);
    if (auto cm = compress(raw, cfg.degree)) {
      next = reconstruct(*cm);
      diag.outcome = LearnOutcome::Full;
      msg = UpdateMessage{k, FullModelUpdate{std::move(*cm)}};
    } else {
      next = raw;
      diag.outcome = LearnOutcome::Raw;
      msg = UpdateMessage{k, RawModelUpdate{raw.row(0)}};
    }
  };

  if (!n_plus || static_cast<int>(w.size()) < *n_plus + 1) {
    // Without a usable cycle estimate only a full update over the current
    // cycle length remains, and only if that length is meaningful.
    if (n_plus || !n_hat_plausible || static_cast<int>(w.size()) < n_hat + 1) {
      diag.outcome = LearnOutcome::Deferred;
      return std::nullopt;
    }
    diag.gamma_full = true;
    full_update(n_hat);
  } else {
    const int shift = estimate_shift(w, model, *n_plus);
    FitReport report = refine_params(w, model, {*n_plus, shift}, cfg);
    diag.fit_error = report.error;
    diag.gamma_full = type_trigger(true, report.error, params_.type);
    if (diag.gamma_full) {
      full_update(*n_plus);
    } else {
      next = std::move(report.candidate);
      diag.outcome = LearnOutcome::Small;
      msg = UpdateMessage{k, SmallModelUpdate{report.theta}};
    }
  }

  buffer_.clear();
  p_dirty_ = true;
  install_model(predictor_, std::move(next));
  return msg;
}

// ---------------------------------------------------------------------------

Receiver::Receiver(SystemModel system, PredictorState initial)
    : system_(std::move(system)), predictor_(std::move(initial)) {}

Vec Receiver::step(std::span<const UpdateMessage> messages) {
  const StateUpdate* state = nullptr;
  const UpdateMessage* model = nullptr;
  for (const auto& msg : messages) {
    if (msg.k != static_cast<std::uint64_t>(k_)) {
      throw ProtocolError("message for sample " + std::to_string(msg.k) +
                          " received at sample " + std::to_string(k_));
    }
    if (const auto* s = std::get_if<StateUpdate>(&msg.payload)) {
      if (state || model) throw ProtocolError("unexpected state update in this sample");
      state = s;
    } else {
      if (model) throw ProtocolError("more than one model update in one sample");
      model = &msg;
    }
  }

  advance(predictor_);
  if (state) {
    if (state->x.size() != system_.state_dim) throw ProtocolError("state dimension mismatch");
    const Vec predicted = predictor_.initialized() ? predict(system_, predictor_) : state->x;
    commit(predictor_, predicted, state->x, true);
  } else {
    if (!predictor_.initialized()) throw ProtocolError("first sample must carry a state update");
    commit(predictor_, predict(system_, predictor_), std::nullopt, false);
  }

  if (model) {
    ExcitationModel next;
    if (const auto* small = std::get_if<SmallModelUpdate>(&model->payload)) {
      next = deform(predictor_.model, small->theta);
    } else if (const auto* full = std::get_if<FullModelUpdate>(&model->payload)) {
      next = reconstruct(full->model);
    } else {
      next = ExcitationModel::from_row(std::get<RawModelUpdate>(model->payload).values);
    }
    install_model(predictor_, std::move(next));
  }
  ++k_;
  return *predictor_.x_hat;
}

}  // namespace etl
