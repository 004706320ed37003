// etlsim: run scenarios or recorded angle series through full communication,
// decimation, event-triggered estimation and event-triggered learning.

#include "etl/error.hpp"
#include "etl/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Common {
  double delta = 2.0;
  double eta = 0.05;
  int t_min = 18;
  double alpha = 5.0;
  double sigma = 0.9;
  int trials = 1000;
  std::uint64_t seed = 1;
  int degree = 18;
  double rate_hz = 50.0;
  std::string out_dir = ".";

  etl::RunParams params() const {
    etl::RunParams p;
    p.etl.state.delta = delta;
    p.etl.eta = eta;
    p.etl.t_min = t_min;
    p.etl.type.alpha = alpha;
    p.etl.learning.degree = degree;
    p.etl.validate();
    p.sigma = sigma;
    p.trials = trials;
    p.seed = seed;
    p.rate_hz = rate_hz;
    return p;
  }
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--delta", c.delta, "state trigger threshold")->capture_default_str();
  app->add_option("--eta", c.eta, "learning trigger significance level")->capture_default_str();
  app->add_option("--tmin-samples", c.t_min, "minimum holding time, samples")->capture_default_str();
  app->add_option("--alpha", c.alpha, "small/full update threshold on E")->capture_default_str();
  app->add_option("--sigma", c.sigma, "process noise std of the model")->capture_default_str();
  app->add_option("--trials", c.trials, "Monte-Carlo trials for the hypothetical CDF")
      ->capture_default_str();
  app->add_option("--seed", c.seed, "Monte-Carlo seed")->capture_default_str();
  app->add_option("--degree", c.degree, "compression polynomial degree")->capture_default_str();
  app->add_option("--rate-hz", c.rate_hz, "sample rate")->capture_default_str();
  if (with_out) app->add_option("-o,--out", c.out_dir, "output directory")->capture_default_str();
}

fs::path out_path(const Common& c, const char* name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

void print_table(const std::vector<etl::StrategyResult>& rows) {
  std::printf("%-8s %10s %8s %8s %7s %6s %6s %9s\n", "strategy", "comm_ratio", "rmse", "max_err",
              "state", "small", "full", "time_ms");
  for (const auto& r : rows) {
    std::printf("%-8s %10.4f %8.4f %8.4f %7lld %6lld %6lld %9.1f%s\n", r.strategy.c_str(),
                r.comm_ratio, r.rmse, r.max_error, static_cast<long long>(r.state_updates),
                static_cast<long long>(r.small_updates), static_cast<long long>(r.full_updates),
                r.runtime_ms, r.mirror_ok ? "" : "  MIRROR MISMATCH");
  }
}

std::vector<etl::Strategy> parse_strategies(const std::vector<std::string>& names) {
  std::vector<etl::Strategy> out;
  for (const auto& n : names) out.push_back(etl::Strategy::parse(n));
  return out;
}

// Runs the requested strategies; the trace and message log of the last
// event-triggered one are written next to the table.
void run_and_report(const std::vector<double>& signal, const Common& c,
                    const std::vector<std::string>& strategy_names, bool write_trace) {
  const auto params = c.params();
  const auto strategies = parse_strategies(strategy_names);
  const auto hyp = etl::make_hypothetical(c.sigma, c.delta, c.trials, c.seed);

  std::vector<etl::StrategyResult> rows;
  etl::RunOutput traced;
  for (const auto& s : strategies) {
    const bool et = s.kind == etl::Strategy::Kind::Etl || s.kind == etl::Strategy::Kind::Etse;
    auto out = etl::run_strategy(signal, s, params, hyp, write_trace && et);
    rows.push_back(out.result);
    if (write_trace && et) traced = std::move(out);
  }
  print_table(rows);
  etl::write_results_csv(rows, out_path(c, "results.csv"));
  if (write_trace && !traced.trace.empty()) {
    etl::write_trace_csv(traced.trace, out_path(c, "trace.csv"));
    etl::write_messages_csv(traced.messages, out_path(c, "messages.csv"));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered estimation and learning simulator"};
  app.require_subcommand(1);

  const std::vector<std::string> default_strategies{"full", "decim2", "etse", "etl"};

  Common sim;
  std::string scenario_file;
  std::vector<std::string> sim_strategies = default_strategies;
  bool no_trace = false;
  auto* simulate = app.add_subcommand("simulate", "run a scenario file through all strategies");
  simulate->add_option("scenario", scenario_file, "scenario JSON")->required()->check(
      CLI::ExistingFile);
  simulate->add_option("--strategies", sim_strategies, "full, decim<N>, etse, etl")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_flag("--no-trace", no_trace, "skip trace.csv / messages.csv");
  add_common(simulate, sim);

  Common ing;
  std::string csv_file;
  std::vector<std::string> ing_strategies = default_strategies;
  bool ing_trace = false;
  auto* ingest = app.add_subcommand("ingest", "run a recorded k,x series through all strategies");
  ingest->add_option("csv", csv_file, "CSV with columns k,x")->required()->check(
      CLI::ExistingFile);
  ingest->add_option("--strategies", ing_strategies, "full, decim<N>, etse, etl")
      ->delimiter(',')
      ->capture_default_str();
  ingest->add_flag("--trace", ing_trace, "also write trace.csv / messages.csv");
  add_common(ingest, ing);

  Common mc;
  auto* mc_cdf = app.add_subcommand("mc-cdf", "emit the perfect-model inter-communication CDF");
  add_common(mc_cdf, mc);

  Common sw;
  std::string sweep_file;
  etl::SweepGrid grid;
  auto* sweep = app.add_subcommand("sweep", "ETL over a grid of trigger parameters");
  sweep->add_option("scenario", sweep_file, "scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid-delta", grid.delta)->delimiter(',');
  sweep->add_option("--grid-eta", grid.eta)->delimiter(',');
  sweep->add_option("--grid-tmin", grid.t_min)->delimiter(',');
  sweep->add_option("--grid-alpha", grid.alpha)->delimiter(',');
  add_common(sweep, sw);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      auto cfg = etl::load_scenario_config(scenario_file);
      const auto samples = etl::generate_scenario(cfg);
      std::printf("scenario: %zu samples (%.1f s at %.0f Hz)\n", samples.size(),
                  static_cast<double>(samples.size()) / cfg.sample_rate_hz, cfg.sample_rate_hz);
      run_and_report(etl::states_of(samples), sim, sim_strategies, !no_trace);
    } else if (ingest->parsed()) {
      const auto series = etl::ingest_csv(csv_file);
      for (const auto& w : series.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::vector<double> signal;
      signal.reserve(series.samples.size());
      for (const auto& s : series.samples) signal.push_back(s.x);
      if (signal.empty()) {
        std::fprintf(stderr, "nothing to run\n");
        return 0;
      }
      run_and_report(signal, ing, ing_strategies, ing_trace);
    } else if (mc_cdf->parsed()) {
      const auto cdf = etl::make_hypothetical(mc.sigma, mc.delta, mc.trials, mc.seed);
      const auto path = out_path(mc, "cdf.csv");
      etl::write_cdf_csv(*cdf, path);
      std::printf("trials %zu  E[tau] %.4f  -> %s\n", cdf->size(), cdf->expected_tau(),
                  path.string().c_str());
    } else if (sweep->parsed()) {
      const auto samples = etl::generate_scenario(etl::load_scenario_config(sweep_file));
      const auto rows = etl::sweep(etl::states_of(samples), sw.params(), grid);
      std::printf("%6s %6s %5s %6s %10s %8s\n", "delta", "eta", "tmin", "alpha", "comm_ratio",
                  "rmse");
      for (const auto& r : rows) {
        std::printf("%6.2f %6.3f %5d %6.2f %10.4f %8.4f\n", r.delta, r.eta, r.t_min, r.alpha,
                    r.result.comm_ratio, r.result.rmse);
      }
      etl::write_sweep_csv(rows, out_path(sw, "sweep.csv"));
    }
  } catch (const etl::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const etl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
