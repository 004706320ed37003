#include "etl/kstats.hpp"

#include "etl/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace etl {

void record_sample(InterCommBuffer& buffer, bool gamma_state) {
  if (!gamma_state) {
    ++buffer.since_update;
    return;
  }
  if (buffer.anchored) buffer.times.push_back(buffer.since_update + 1);
  buffer.since_update = 0;
  buffer.anchored = true;
}

EmpiricalCdf::EmpiricalCdf(std::vector<int> times) : sorted_(std::move(times)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(int tau) const {
  if (sorted_.empty()) return 0.0;
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), tau) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

std::optional<EmpiricalCdf> empirical_cdf(std::span<const int> times) {
  if (times.empty()) return std::nullopt;
  return EmpiricalCdf(std::vector<int>(times.begin(), times.end()));
}

HypotheticalCdf::HypotheticalCdf(std::vector<int> pool) : pool_(std::move(pool)) {
  if (pool_.empty()) throw ConfigError("hypothetical sample pool is empty");
  std::sort(pool_.begin(), pool_.end());
  const double sum = std::accumulate(pool_.begin(), pool_.end(), 0.0);
  mean_ = sum / static_cast<double>(pool_.size());
}

double HypotheticalCdf::operator()(int tau) const {
  const auto count = std::upper_bound(pool_.begin(), pool_.end(), tau) - pool_.begin();
  return static_cast<double>(count) / static_cast<double>(pool_.size());
}

namespace {

HypotheticalCdf simulate_pool(const SystemModel& system, double delta, int trials, Rng& rng,
                              const ExcitationModel* excitation, std::int64_t max_steps) {
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (trials < 1) throw ConfigError("at least one Monte-Carlo trial is required");
  if (system.noise_sigma == 0.0) {
    throw DegenerateDistributionError("zero noise never reaches delta; no state updates occur");
  }
  if (excitation && excitation->input_dim() != system.input_dim) {
    throw ConfigError("excitation dimension does not match the system input");
  }

  const Vec zero_u = system.zero_input();
  const Vec zero_eps = system.zero_noise();
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(trials));
  int column = 1;
  for (int trial = 0; trial < trials; ++trial) {
    Vec x = system.zero_state();
    Vec x_hat = x;
    std::int64_t steps = 0;
    while (true) {
      ++steps;
      if (steps > max_steps) {
        throw DegenerateDistributionError("Monte-Carlo trial exceeded the step limit");
      }
      Vec u = zero_u;
      if (excitation) {
        u = excitation->column(column);
        column = column == excitation->cycle_length() ? 1 : column + 1;
      }
      x = system.step(x, u, system.sample_noise(rng));
      x_hat = system.step(x_hat, u, zero_eps);
      if (system.metric(x, x_hat) >= delta) break;
    }
    pool.push_back(static_cast<int>(steps));
  }
  return HypotheticalCdf(std::move(pool));
}

}  // namespace

HypotheticalCdf mc_hypothetical_cdf(const SystemModel& system, double delta, int trials,
                                    Rng& rng, std::int64_t max_steps) {
  return simulate_pool(system, delta, trials, rng, nullptr, max_steps);
}

HypotheticalCdf mc_hypothetical_cdf(const SystemModel& system, double delta, int trials,
                                    Rng& rng, const ExcitationModel& excitation,
                                    std::int64_t max_steps) {
  return simulate_pool(system, delta, trials, rng, &excitation, max_steps);
}

void write_cdf_csv(const HypotheticalCdf& cdf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "tau,count,cdf\n";
  const auto& pool = cdf.pool();
  std::size_t i = 0;
  out.precision(17);
  while (i < pool.size()) {
    std::size_t j = i;
    while (j < pool.size() && pool[j] == pool[i]) ++j;
    out << pool[i] << ',' << (j - i) << ',' << cdf(pool[i]) << '\n';
    i = j;
  }
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

namespace {

// max over support points of (a(t) * h - b(t) * i), where a and b count
// the empirical and hypothetical values <= t. D+ = max(0, result) / (i h).
std::int64_t d_plus_numerator(std::span<const int> emp, std::span<const int> hyp) {
  const auto i = static_cast<std::int64_t>(emp.size());
  const auto h = static_cast<std::int64_t>(hyp.size());
  std::int64_t best = 0;
  std::size_t b = 0;
  std::size_t a = 0;
  // F_emp - F_hyp only increases at empirical jump points.
  while (a < emp.size()) {
    const int t = emp[a];
    while (a < emp.size() && emp[a] == t) ++a;
    while (b < hyp.size() && hyp[b] <= t) ++b;
    best = std::max(best, static_cast<std::int64_t>(a) * h - static_cast<std::int64_t>(b) * i);
  }
  return best;
}

bool is_sorted_span(std::span<const int> s) { return std::is_sorted(s.begin(), s.end()); }

KsResult ks_sorted(std::span<const int> emp, std::span<const int> hyp) {
  if (hyp.empty()) throw ConfigError("hypothetical sample must not be empty");
  if (emp.empty()) return {0.0, 1.0, false};
  const auto i = static_cast<std::int64_t>(emp.size());
  const auto h = static_cast<std::int64_t>(hyp.size());
  const std::int64_t num = d_plus_numerator(emp, hyp);
  const double d_plus = static_cast<double>(num) / static_cast<double>(i * h);
  if (num <= 0) return {0.0, 1.0, i * h <= kKsExactLimit};
  if (i * h <= kKsExactLimit) return {d_plus, ks_exact_p(emp, hyp), true};
  return {d_plus, ks_asymptotic_p(d_plus, emp.size(), hyp.size()), false};
}

}  // namespace

double ks_d_plus(std::span<const int> empirical_sorted, std::span<const int> hypothetical_sorted) {
  if (empirical_sorted.empty() || hypothetical_sorted.empty()) return 0.0;
  const std::int64_t num = d_plus_numerator(empirical_sorted, hypothetical_sorted);
  return static_cast<double>(num) / (static_cast<double>(empirical_sorted.size()) *
                                     static_cast<double>(hypothetical_sorted.size()));
}

double ks_asymptotic_p(double d_plus, std::size_t i, std::size_t h) {
  if (i == 0 || h == 0) return 1.0;
  const double n = static_cast<double>(i) * static_cast<double>(h) /
                   (static_cast<double>(i) + static_cast<double>(h));
  return std::min(1.0, std::exp(-2.0 * d_plus * d_plus * n));
}

double ks_exact_p(std::span<const int> emp, std::span<const int> hyp) {
  if (emp.empty() || hyp.empty()) return 1.0;
  const std::int64_t observed = d_plus_numerator(emp, hyp);
  if (observed <= 0) return 1.0;

  const auto i = static_cast<std::int64_t>(emp.size());
  const auto h = static_cast<std::int64_t>(hyp.size());
  const std::size_t total = emp.size() + hyp.size();

  std::vector<int> pooled;
  pooled.reserve(total);
  std::merge(emp.begin(), emp.end(), hyp.begin(), hyp.end(), std::back_inserter(pooled));

  // prob[a]: probability that a random split puts a of the first c pooled
  // values into the empirical sample and has not yet reached D+ >= observed.
  std::vector<double> prob(static_cast<std::size_t>(i) + 1, 0.0);
  std::vector<double> next(prob.size(), 0.0);
  prob[0] = 1.0;
  double reached = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    std::fill(next.begin(), next.end(), 0.0);
    const double remaining = static_cast<double>(total - c);
    const auto a_max = std::min<std::int64_t>(i, static_cast<std::int64_t>(c));
    for (std::int64_t a = 0; a <= a_max; ++a) {
      const double mass = prob[static_cast<std::size_t>(a)];
      if (mass == 0.0) continue;
      const std::int64_t b = static_cast<std::int64_t>(c) - a;
      if (a < i) next[static_cast<std::size_t>(a + 1)] += mass * static_cast<double>(i - a) / remaining;
      if (b < h) next[static_cast<std::size_t>(a)] += mass * static_cast<double>(h - b) / remaining;
    }
    std::swap(prob, next);
    const std::size_t seen = c + 1;
    const bool boundary = seen == total || pooled[seen - 1] != pooled[seen];
    if (!boundary) continue;
    const auto a_hi = std::min<std::int64_t>(i, static_cast<std::int64_t>(seen));
    for (std::int64_t a = 0; a <= a_hi; ++a) {
      const std::int64_t b = static_cast<std::int64_t>(seen) - a;
      if (b < 0 || b > h) continue;
      if (a * h - b * i >= observed) {
        reached += prob[static_cast<std::size_t>(a)];
        prob[static_cast<std::size_t>(a)] = 0.0;
      }
    }
  }
  return std::clamp(reached, 0.0, 1.0);
}

KsResult ks_one_sided(std::span<const int> empirical, std::span<const int> hypothetical) {
  if (is_sorted_span(empirical) && is_sorted_span(hypothetical)) {
    return ks_sorted(empirical, hypothetical);
  }
  std::vector<int> emp(empirical.begin(), empirical.end());
  std::vector<int> hyp(hypothetical.begin(), hypothetical.end());
  std::sort(emp.begin(), emp.end());
  std::sort(hyp.begin(), hyp.end());
  return ks_sorted(emp, hyp);
}

KsResult ks_one_sided(std::span<const int> empirical, const HypotheticalCdf& hypothetical) {
  return ks_one_sided(empirical, std::span<const int>(hypothetical.pool()));
}

}  // namespace etl
