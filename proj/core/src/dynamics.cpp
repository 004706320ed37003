#include "etl/dynamics.hpp"

#include "etl/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace etl {

namespace {

void check_dim(const Vec& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw ConfigError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                      ", expected " + std::to_string(expected));
  }
}

}  // namespace

Vec SystemModel::step(const Vec& x_prev, const Vec& u, const Vec& eps) const {
  check_dim(x_prev, state_dim, "state");
  check_dim(u, input_dim, "input");
  check_dim(eps, noise_dim, "noise");
  Vec next = dynamics(x_prev, u, eps);
  check_dim(next, state_dim, "dynamics output");
  return next;
}

Vec SystemModel::sample_noise(Rng& rng) const {
  Vec eps = Vec::Zero(noise_dim);
  if (noise_sigma == 0.0) return eps;
  std::normal_distribution<double> normal(0.0, noise_sigma);
  for (int i = 0; i < noise_dim; ++i) eps[i] = normal(rng);
  return eps;
}

double euclidean_metric(const Vec& a, const Vec& b) { return (a - b).norm(); }

SystemModel scalar_random_walk(double noise_sigma) {
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  SystemModel model;
  model.state_dim = model.input_dim = model.noise_dim = 1;
  model.noise_sigma = noise_sigma;
  model.dynamics = [](const Vec& x, const Vec& u, const Vec& eps) -> Vec {
    return scalar(x[0] + u[0] + eps[0]);
  };
  model.metric = [](const Vec& a, const Vec& b) { return std::abs(a[0] - b[0]); };
  return model;
}

// ---------------------------------------------------------------------------

namespace {

struct ShapeName {
  ExcitationShape shape;
  std::string_view name;
};

constexpr ShapeName kShapeNames[] = {
    {ExcitationShape::Flat, "flat"},
    {ExcitationShape::Sine, "sine"},
    {ExcitationShape::TwoHarmonic, "two_harmonic"},
    {ExcitationShape::ThreeHarmonic, "three_harmonic"},
    {ExcitationShape::Gait, "gait"},
    {ExcitationShape::GaitDropFoot, "gait_drop_foot"},
    {ExcitationShape::GaitStiffKnee, "gait_stiff_knee"},
    {ExcitationShape::GaitDragged, "gait_dragged"},
};

struct Harmonic {
  double amplitude;
  double phase;  // radians
};

// theta(p) = sum_h a_h * sin(2 pi h p + phi_h), h = 1..3
struct Template {
  Harmonic h[3];
};

Template template_of(ExcitationShape shape) {
  switch (shape) {
    case ExcitationShape::Flat:
      return {{{0, 0}, {0, 0}, {0, 0}}};
    case ExcitationShape::Sine:
      return {{{1, 0}, {0, 0}, {0, 0}}};
    case ExcitationShape::TwoHarmonic:
      return {{{1, 0}, {0.5, 0}, {0, 0}}};
    case ExcitationShape::ThreeHarmonic:
      return {{{1, 0}, {0.5, 0}, {0.25, 0}}};
    case ExcitationShape::Gait:
      return {{{0.55, 0.0}, {0.35, -0.6}, {0.12, 0.9}}};
    case ExcitationShape::GaitDropFoot:
      return {{{0.60, 0.4}, {0.30, 2.54}, {0.20, 1.57}}};
    case ExcitationShape::GaitStiffKnee:
      return {{{0.62, -1.17}, {0.42, -0.12}, {0.27, 2.09}}};
    case ExcitationShape::GaitDragged:
      return {{{0.54, 0.60}, {0.38, -1.65}, {0.41, 2.46}}};
  }
  return {};
}

}  // namespace

std::string_view to_string(ExcitationShape shape) {
  for (const auto& entry : kShapeNames) {
    if (entry.shape == shape) return entry.name;
  }
  return "unknown";
}

std::optional<ExcitationShape> parse_shape(std::string_view name) {
  for (const auto& entry : kShapeNames) {
    if (entry.name == name) return entry.shape;
  }
  return std::nullopt;
}

std::vector<ExcitationShape> all_shapes() {
  std::vector<ExcitationShape> out;
  for (const auto& entry : kShapeNames) out.push_back(entry.shape);
  return out;
}

double shape_angle(ExcitationShape shape, double phase) {
  const Template t = template_of(shape);
  double angle = 0.0;
  for (int h = 0; h < 3; ++h) {
    if (t.h[h].amplitude == 0.0) continue;
    angle += t.h[h].amplitude *
             std::sin(2.0 * std::numbers::pi * (h + 1) * phase + t.h[h].phase);
  }
  return angle;
}

std::vector<double> cycle_increments(ExcitationShape shape, int cycle_length,
                                     double amplitude, double start_phase) {
  if (cycle_length < 1) throw ConfigError("cycle length must be >= 1");
  std::vector<double> u(static_cast<std::size_t>(cycle_length));
  const double n = cycle_length;
  for (int i = 0; i < cycle_length; ++i) {
    u[i] = amplitude * (shape_angle(shape, start_phase + (i + 1) / n) -
                        shape_angle(shape, start_phase + i / n));
  }
  return u;
}

std::vector<ScenarioSample> generate_scenario(const ScenarioConfig& cfg) {
  if (cfg.segments.empty()) throw ConfigError("scenario has no segments");
  if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (!(cfg.sample_rate_hz > 0.0)) throw ConfigError("sample rate must be > 0");
  std::size_t total = 0;
  for (const auto& seg : cfg.segments) {
    if (seg.duration < 1) throw ConfigError("segment duration must be >= 1");
    if (seg.cycle_length < 1) throw ConfigError("segment cycle length must be >= 1");
    total += static_cast<std::size_t>(seg.duration);
  }

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);
  std::vector<ScenarioSample> out;
  out.reserve(total);

  double x = cfg.initial_state;
  double phase = 0.0;
  std::int64_t k = 0;
  for (std::size_t s = 0; s < cfg.segments.size(); ++s) {
    const Segment& seg = cfg.segments[s];
    const double start = phase + seg.phase_offset;
    const auto table = cycle_increments(seg.shape, seg.cycle_length, seg.amplitude, start);
    for (int i = 0; i < seg.duration; ++i, ++k) {
      const double u = table[static_cast<std::size_t>(i % seg.cycle_length)];
      const double eps = cfg.noise_sigma == 0.0 ? 0.0 : normal(rng);
      x = x + u + eps;
      out.push_back({k, x, u, static_cast<int>(s)});
    }
    const double end = start + static_cast<double>(seg.duration) / seg.cycle_length;
    phase = end - std::floor(end);
  }
  return out;
}

std::vector<double> states_of(const std::vector<ScenarioSample>& samples) {
  std::vector<double> x;
  x.reserve(samples.size());
  for (const auto& s : samples) x.push_back(s.x);
  return x;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_key(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario file must be a JSON object");

  ScenarioConfig cfg;
  cfg.sample_rate_hz = optional_key(j, "sample_rate_hz", cfg.sample_rate_hz);
  cfg.noise_sigma = optional_key(j, "noise_sigma", cfg.noise_sigma);
  cfg.seed = optional_key<std::uint64_t>(j, "seed", cfg.seed);
  cfg.initial_state = optional_key(j, "initial_state", cfg.initial_state);

  if (!j.contains("segments") || !j["segments"].is_array()) {
    throw ConfigError("scenario needs a 'segments' array");
  }
  for (const auto& js : j["segments"]) {
    Segment seg;
    seg.duration = required<int>(js, "duration");
    seg.cycle_length = required<int>(js, "cycle_length");
    const auto shape_name = optional_key<std::string>(js, "shape", "gait");
    const auto shape = parse_shape(shape_name);
    if (!shape) throw ConfigError("unknown shape '" + shape_name + "'");
    seg.shape = *shape;
    seg.amplitude = optional_key(js, "amplitude", seg.amplitude);
    seg.phase_offset = optional_key(js, "phase_offset", seg.phase_offset);
    if (seg.duration < 1 || seg.cycle_length < 1) {
      throw ConfigError("segment duration and cycle_length must be positive");
    }
    cfg.segments.push_back(seg);
  }
  if (cfg.segments.empty()) throw ConfigError("scenario has no segments");
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["sample_rate_hz"] = cfg.sample_rate_hz;
  j["noise_sigma"] = cfg.noise_sigma;
  j["seed"] = cfg.seed;
  j["initial_state"] = cfg.initial_state;
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : cfg.segments) {
    j["segments"].push_back({{"duration", seg.duration},
                             {"cycle_length", seg.cycle_length},
                             {"shape", std::string(to_string(seg.shape))},
                             {"amplitude", seg.amplitude},
                             {"phase_offset", seg.phase_offset}});
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

CsvSeries parse_csv(std::string_view text) {
  CsvSeries series;
  std::size_t line_no = 0;
  bool seen_content = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(line_no, "expected two comma-separated columns");
    }
    const auto k_text = line.substr(0, comma);
    const auto x_text = line.substr(comma + 1);
    if (x_text.find(',') != std::string_view::npos) {
      throw ParseError(line_no, "expected exactly two columns");
    }
    double k_real = 0.0;
    double x = 0.0;
    const bool k_ok = parse_number(k_text, k_real);
    const bool x_ok = parse_number(x_text, x);
    if (!seen_content && !k_ok && !x_ok) {
      seen_content = true;  // header
      continue;
    }
    seen_content = true;
    if (!k_ok) throw ParseError(line_no, "cannot parse k '" + std::string(trim(k_text)) + "'");
    if (!x_ok) throw ParseError(line_no, "cannot parse x '" + std::string(trim(x_text)) + "'");
    if (k_real != std::floor(k_real)) {
      throw ParseError(line_no, "k must be an integer");
    }
    const auto k = static_cast<std::int64_t>(k_real);
    if (!series.samples.empty() && k <= series.samples.back().k) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": sample index is not strictly increasing");
    }
    series.samples.push_back({k, x});
  }
  if (series.samples.empty()) series.warnings.emplace_back("CSV input contains no samples");
  return series;
}

CsvSeries ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CSV file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace etl
