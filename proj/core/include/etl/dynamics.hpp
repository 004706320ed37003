#pragma once

#include "etl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace etl {

using Rng = std::mt19937_64;

/// Discrete-time system x[k] = f(x[k-1], u[k], eps[k]) with zero-mean
/// Gaussian noise of per-component standard deviation `noise_sigma`.
struct SystemModel {
  using Dynamics = std::function<Vec(const Vec& x, const Vec& u, const Vec& eps)>;
  using Metric = std::function<double(const Vec& a, const Vec& b)>;

  int state_dim = 1;
  int input_dim = 1;
  int noise_dim = 1;
  Dynamics dynamics;
  double noise_sigma = 0.0;
  Metric metric;

  /// Applies f after checking argument dimensions. Throws ConfigError.
  Vec step(const Vec& x_prev, const Vec& u, const Vec& eps) const;

  /// One draw of eps ~ N(0, sigma^2 I). Exactly zero when sigma == 0.
  Vec sample_noise(Rng& rng) const;

  Vec zero_state() const { return Vec::Zero(state_dim); }
  Vec zero_input() const { return Vec::Zero(input_dim); }
  Vec zero_noise() const { return Vec::Zero(noise_dim); }
};

/// x[k] = x[k-1] + u[k] + eps[k] with the absolute-difference metric.
SystemModel scalar_random_walk(double noise_sigma);

/// Euclidean distance, the default metric for vector instances.
double euclidean_metric(const Vec& a, const Vec& b);

// ---------------------------------------------------------------------------
// Synthetic scenarios

/// Built-in one-cycle angle templates. Each is periodic in phase with
/// period 1 and uses at most three harmonics.
enum class ExcitationShape {
  Flat,
  Sine,
  TwoHarmonic,
  ThreeHarmonic,
  Gait,
  GaitDropFoot,
  GaitStiffKnee,
  GaitDragged,
};

std::string_view to_string(ExcitationShape shape);
std::optional<ExcitationShape> parse_shape(std::string_view name);
std::vector<ExcitationShape> all_shapes();

/// Normalised angle of `shape` at `phase` (in cycles).
double shape_angle(ExcitationShape shape, double phase);

/// Increments of one cycle: u_i = A * (theta(p0 + (i+1)/N) - theta(p0 + i/N)).
std::vector<double> cycle_increments(ExcitationShape shape, int cycle_length,
                                     double amplitude, double start_phase);

struct Segment {
  int duration = 0;      // samples
  int cycle_length = 0;  // true N, samples
  ExcitationShape shape = ExcitationShape::Gait;
  double amplitude = 1.0;     // angle units
  double phase_offset = 0.0;  // cycles, added to the phase carried over
};

struct ScenarioConfig {
  std::vector<Segment> segments;
  double sample_rate_hz = 50.0;
  double noise_sigma = 0.9;
  std::uint64_t seed = 0;
  double initial_state = 0.0;
};

struct ScenarioSample {
  std::int64_t k = 0;
  double x = 0.0;
  double u = 0.0;  // true excitation
  int segment = 0;
};

/// Concatenates the segments. Phase is continuous across segment
/// boundaries; within a segment u is a table lookup, so u[k+N] == u[k].
/// Throws ConfigError on an empty or invalid segment list.
std::vector<ScenarioSample> generate_scenario(const ScenarioConfig& cfg);

std::vector<double> states_of(const std::vector<ScenarioSample>& samples);

/// JSON scenario files; see README for the schema.
ScenarioConfig parse_scenario_config(std::string_view json_text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
std::string scenario_config_to_json(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvSample {
  std::int64_t k = 0;
  double x = 0.0;
};

struct CsvSeries {
  std::vector<CsvSample> samples;
  std::vector<std::string> warnings;
};

/// Two numeric columns `k,x`, optional header line. Throws ParseError with
/// the offending line number, FormatError when k is not strictly increasing.
CsvSeries parse_csv(std::string_view text);
CsvSeries ingest_csv(const std::filesystem::path& path);

}  // namespace etl
