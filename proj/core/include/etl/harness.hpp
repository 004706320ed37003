#pragma once

#include "etl/agents.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace etl {

struct Strategy {
  enum class Kind { Full, Decimate, Etse, Etl };
  Kind kind = Kind::Etl;
  int factor = 2;  // decimation only

  std::string name() const;
  /// "full", "decim<N>" / "decimate:<N>", "etse", "etl". Throws ConfigError.
  static Strategy parse(const std::string& text);
  static std::vector<Strategy> comparison_set();
};

struct RunParams {
  EtlParams etl;
  double sigma = 0.9;
  int trials = 1000;
  std::uint64_t seed = 1;
  double rate_hz = 50.0;
  /// Start both predictors from this state instead of the empty one
  /// (e.g. with an exactly known model).
  std::optional<PredictorState> initial;
};

struct StrategyResult {
  std::string strategy;
  double comm_ratio = 0.0;
  double rmse = 0.0;
  double max_error = 0.0;
  std::int64_t samples = 0;
  std::int64_t values_sent = 0;
  std::int64_t state_updates = 0;
  std::int64_t small_updates = 0;
  std::int64_t full_updates = 0;  // compressed and raw
  std::int64_t learn_events = 0;  // gamma_learn, including deferred ones
  bool mirror_ok = true;
  double runtime_ms = 0.0;
};

struct TraceRow {
  std::int64_t k = 0;
  double x = 0.0;
  double x_hat_sender = 0.0;
  double x_hat_receiver = 0.0;
  double d = 0.0;
  double p = 1.0;
  bool gamma_state = false;
  bool gamma_learn = false;
  bool gamma_full = false;
  double fit_error = 0.0;  // NaN when no learning happened
  std::int64_t values_sent = 0;
};

struct MessageRecord {
  std::int64_t k = 0;
  std::string variant;
  std::size_t value_count = 0;
};

struct RunOutput {
  StrategyResult result;
  std::vector<TraceRow> trace;
  std::vector<MessageRecord> messages;
};

/// Perfect-model inter-communication distribution for the scalar system.
std::shared_ptr<const HypotheticalCdf> make_hypothetical(double sigma, double delta, int trials,
                                                         std::uint64_t seed);

/// Runs one strategy over a scalar signal. Every message of the event
/// triggered strategies goes through encode/decode before the receiver
/// sees it, and the sender/receiver predictors are compared bitwise after
/// each sample. `hypothetical` may be null for strategies without learning.
RunOutput run_strategy(std::span<const double> signal, const Strategy& strategy,
                       const RunParams& params,
                       std::shared_ptr<const HypotheticalCdf> hypothetical,
                       bool keep_trace = false);

/// full, decim2, etse, etl on the same signal.
std::vector<StrategyResult> compare(std::span<const double> signal, const RunParams& params,
                                    std::shared_ptr<const HypotheticalCdf> hypothetical);

struct SweepGrid {
  std::vector<double> delta;
  std::vector<double> eta;
  std::vector<int> t_min;
  std::vector<double> alpha;
};

struct SweepRow {
  double delta = 0.0;
  double eta = 0.0;
  int t_min = 0;
  double alpha = 0.0;
  StrategyResult result;
};

/// ETL over the Cartesian product of the grid. The hypothetical CDF is
/// rebuilt per delta from params.sigma / trials / seed.
std::vector<SweepRow> sweep(std::span<const double> signal, const RunParams& params,
                            const SweepGrid& grid);

void write_results_csv(const std::vector<StrategyResult>& rows, const std::filesystem::path& path);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);
void write_messages_csv(const std::vector<MessageRecord>& rows, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace etl
