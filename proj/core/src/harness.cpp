#include "etl/harness.hpp"

#include "etl/error.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace etl {

std::string Strategy::name() const {
  switch (kind) {
    case Kind::Full:
      return "full";
    case Kind::Decimate:
      return "decim" + std::to_string(factor);
    case Kind::Etse:
      return "etse";
    case Kind::Etl:
      return "etl";
  }
  return "unknown";
}

Strategy Strategy::parse(const std::string& text) {
  if (text == "full") return {Kind::Full, 1};
  if (text == "etse") return {Kind::Etse, 1};
  if (text == "etl") return {Kind::Etl, 1};
  std::string factor;
  if (text.rfind("decimate:", 0) == 0) {
    factor = text.substr(9);
  } else if (text.rfind("decim", 0) == 0) {
    factor = text.substr(5);
  } else {
    throw ConfigError("unknown strategy '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const int f = std::stoi(factor, &used);
    if (used != factor.size() || f < 1) throw ConfigError("bad decimation factor");
    return {Kind::Decimate, f};
  } catch (const std::logic_error&) {
    throw ConfigError("bad decimation factor in '" + text + "'");
  }
}

std::vector<Strategy> Strategy::comparison_set() {
  return {{Kind::Full, 1}, {Kind::Decimate, 2}, {Kind::Etse, 1}, {Kind::Etl, 1}};
}

std::shared_ptr<const HypotheticalCdf> make_hypothetical(double sigma, double delta, int trials,
                                                         std::uint64_t seed) {
  Rng rng(seed);
  return std::make_shared<const HypotheticalCdf>(
      mc_hypothetical_cdf(scalar_random_walk(sigma), delta, trials, rng));
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void finish(StrategyResult& r, double sq_sum) {
  r.rmse = r.samples > 0 ? std::sqrt(sq_sum / static_cast<double>(r.samples)) : 0.0;
  r.comm_ratio = r.samples > 0 ? static_cast<double>(r.values_sent) / static_cast<double>(r.samples)
                               : 0.0;
}

// Full communication and decimation: the receiver holds the last value.
RunOutput run_sampled(std::span<const double> signal, const Strategy& strategy, bool keep_trace) {
  RunOutput out;
  auto& r = out.result;
  r.strategy = strategy.name();
  const int factor = strategy.kind == Strategy::Kind::Full ? 1 : strategy.factor;
  double held = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const bool send = k % static_cast<std::size_t>(factor) == 0;
    if (send) {
      held = signal[k];
      ++r.values_sent;
      ++r.state_updates;
      if (keep_trace) out.messages.push_back({static_cast<std::int64_t>(k), "state", 1});
    }
    const double err = signal[k] - held;
    sq += err * err;
    r.max_error = std::max(r.max_error, std::abs(err));
    ++r.samples;
    if (keep_trace) {
      out.trace.push_back({static_cast<std::int64_t>(k), signal[k], held, held, std::abs(err), 1.0,
                           send, false, false, std::numeric_limits<double>::quiet_NaN(),
                           r.values_sent});
    }
  }
  finish(r, sq);
  return out;
}

RunOutput run_event_triggered(std::span<const double> signal, const Strategy& strategy,
                              const RunParams& params,
                              std::shared_ptr<const HypotheticalCdf> hypothetical,
                              bool keep_trace) {
  RunOutput out;
  auto& r = out.result;
  r.strategy = strategy.name();

  EtlParams etl = params.etl;
  etl.learning_enabled = strategy.kind == Strategy::Kind::Etl;
  const SystemModel system = scalar_random_walk(params.sigma);
  const PredictorState initial =
      strategy.kind == Strategy::Kind::Etl && params.initial ? *params.initial : PredictorState{};
  Sender sender(system, etl, etl.learning_enabled ? std::move(hypothetical) : nullptr, initial);
  Receiver receiver(system, initial);
  const WireConfig wire = etl.wire(system.state_dim);

  double sq = 0.0;
  std::vector<UpdateMessage> received;
  for (double x : signal) {
    auto step = sender.step(x);
    received.clear();
    for (const auto& msg : step.messages) {
      received.push_back(decode(encode(msg), wire));
      if (keep_trace) {
        out.messages.push_back({step.diag.k, std::string(variant_name(msg)), value_count(msg)});
      }
    }
    const Vec x_hat = receiver.step(received);
    r.mirror_ok = r.mirror_ok && bit_identical(sender.predictor(), receiver.predictor());

    const double err = system.metric(scalar(x), x_hat);
    sq += err * err;
    r.max_error = std::max(r.max_error, err);
    if (step.diag.gamma_learn) ++r.learn_events;
    ++r.samples;
    if (keep_trace) {
      const auto& d = step.diag;
      out.trace.push_back({d.k, x, d.x_hat[0], x_hat[0], d.d, d.p, d.gamma_state, d.gamma_learn,
                           d.gamma_full,
                           d.fit_error ? *d.fit_error : std::numeric_limits<double>::quiet_NaN(),
                           d.values_sent});
    }
  }
  const auto& ledger = sender.ledger();
  r.values_sent = ledger.values_sent;
  r.state_updates = ledger.state_updates;
  r.small_updates = ledger.small_updates;
  r.full_updates = ledger.full_updates + ledger.raw_updates;
  finish(r, sq);
  return out;
}

}  // namespace

RunOutput run_strategy(std::span<const double> signal, const Strategy& strategy,
                       const RunParams& params,
                       std::shared_ptr<const HypotheticalCdf> hypothetical, bool keep_trace) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  switch (strategy.kind) {
    case Strategy::Kind::Full:
    case Strategy::Kind::Decimate:
      out = run_sampled(signal, strategy, keep_trace);
      break;
    case Strategy::Kind::Etl:
      if (!hypothetical) {
        hypothetical = make_hypothetical(params.sigma, params.etl.state.delta, params.trials,
                                         params.seed);
      }
      [[fallthrough]];
    case Strategy::Kind::Etse:
      out = run_event_triggered(signal, strategy, params, std::move(hypothetical), keep_trace);
      break;
  }
  out.result.runtime_ms = seconds_since(t0);
  return out;
}

std::vector<StrategyResult> compare(std::span<const double> signal, const RunParams& params,
                                    std::shared_ptr<const HypotheticalCdf> hypothetical) {
  if (!hypothetical) {
    hypothetical =
        make_hypothetical(params.sigma, params.etl.state.delta, params.trials, params.seed);
  }
  std::vector<StrategyResult> rows;
  for (const auto& s : Strategy::comparison_set()) {
    rows.push_back(run_strategy(signal, s, params, hypothetical).result);
  }
  return rows;
}

std::vector<SweepRow> sweep(std::span<const double> signal, const RunParams& params,
                            const SweepGrid& grid) {
  auto or_default = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  const auto deltas = or_default(grid.delta, params.etl.state.delta);
  const auto etas = or_default(grid.eta, params.etl.eta);
  const auto tmins = or_default(grid.t_min, params.etl.t_min);
  const auto alphas = or_default(grid.alpha, params.etl.type.alpha);

  std::vector<SweepRow> rows;
  const Strategy etl{Strategy::Kind::Etl, 1};
  for (double delta : deltas) {
    const auto hyp = make_hypothetical(params.sigma, delta, params.trials, params.seed);
    for (double eta : etas) {
      for (int t_min : tmins) {
        for (double alpha : alphas) {
          RunParams p = params;
          p.etl.state.delta = delta;
          p.etl.eta = eta;
          p.etl.t_min = t_min;
          p.etl.type.alpha = alpha;
          rows.push_back({delta, eta, t_min, alpha, run_strategy(signal, etl, p, hyp).result});
        }
      }
    }
  }
  return rows;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.precision(10);
  return out;
}

void write_result_fields(std::ostream& out, const StrategyResult& r) {
  out << r.strategy << ',' << r.comm_ratio << ',' << r.rmse << ',' << r.max_error << ','
      << r.samples << ',' << r.values_sent << ',' << r.state_updates << ',' << r.small_updates
      << ',' << r.full_updates << ',' << r.learn_events << ',' << (r.mirror_ok ? 1 : 0) << ','
      << r.runtime_ms;
}

constexpr const char* kResultHeader =
    "strategy,comm_ratio,rmse,max_error,samples,values_sent,state_updates,small_updates,"
    "full_updates,learn_events,mirror_ok,runtime_ms";

}  // namespace

void write_results_csv(const std::vector<StrategyResult>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << kResultHeader << '\n';
  for (const auto& r : rows) {
    write_result_fields(out, r);
    out << '\n';
  }
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "k,x,x_hat_sender,x_hat_receiver,d,p,gamma_state,gamma_learn,gamma_full,E,values_sent\n";
  for (const auto& t : rows) {
    out << t.k << ',' << t.x << ',' << t.x_hat_sender << ',' << t.x_hat_receiver << ',' << t.d
        << ',' << t.p << ',' << t.gamma_state << ',' << t.gamma_learn << ',' << t.gamma_full << ',';
    if (!std::isnan(t.fit_error)) out << t.fit_error;
    out << ',' << t.values_sent << '\n';
  }
}

void write_messages_csv(const std::vector<MessageRecord>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "k,variant,value_count\n";
  for (const auto& m : rows) out << m.k << ',' << m.variant << ',' << m.value_count << '\n';
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "delta,eta,t_min,alpha," << kResultHeader << '\n';
  for (const auto& row : rows) {
    out << row.delta << ',' << row.eta << ',' << row.t_min << ',' << row.alpha << ',';
    write_result_fields(out, row.result);
    out << '\n';
  }
}

}  // namespace etl
