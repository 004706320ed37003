#pragma once

#include "etl/dynamics.hpp"
#include "etl/predictor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace etl {

/// Inter-communication times observed since the last learning event.
///
/// A stored time is the number of samples from one state update to the
/// next, so consecutive updates give 1. No time is stored for the first
/// update of a run (there is nothing to measure from) unless the buffer
/// was created anchored, i.e. with an update assumed just before it.
struct InterCommBuffer {
  std::vector<int> times;
  int since_update = 0;  // non-triggering samples since the last update
  bool anchored = true;

  void clear() { times.clear(); }
};

void record_sample(InterCommBuffer& buffer, bool gamma_state);

/// Right-continuous step function F(t) = #{tau_i <= t} / i.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<int> times);

  double operator()(int tau) const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<int>& sorted() const { return sorted_; }

 private:
  std::vector<int> sorted_;
};

/// Returns nullopt for an empty buffer; callers then accept the null.
std::optional<EmpiricalCdf> empirical_cdf(std::span<const int> times);

/// Distribution of inter-communication times under a perfect model.
/// Immutable once built.
class HypotheticalCdf {
 public:
  explicit HypotheticalCdf(std::vector<int> pool);

  double operator()(int tau) const;
  double expected_tau() const { return mean_; }
  std::size_t size() const { return pool_.size(); }
  const std::vector<int>& pool() const { return pool_; }  // sorted

 private:
  std::vector<int> pool_;
  double mean_ = 0.0;
};

/// Monte-Carlo simulation of the closed loop with an exact model: each
/// trial runs process and predictor from a common state until the metric
/// reaches delta and records the number of samples. The excitation, if
/// given, drives both sides identically.
///
/// Throws ConfigError for delta <= 0 or trials < 1, and
/// DegenerateDistributionError when no update can occur (zero noise) or a
/// trial exceeds `max_steps`.
HypotheticalCdf mc_hypothetical_cdf(const SystemModel& system, double delta, int trials,
                                    Rng& rng, std::int64_t max_steps = 10'000'000);
HypotheticalCdf mc_hypothetical_cdf(const SystemModel& system, double delta, int trials,
                                    Rng& rng, const ExcitationModel& excitation,
                                    std::int64_t max_steps = 10'000'000);

/// tau,count,cdf rows over the pool's support.
void write_cdf_csv(const HypotheticalCdf& cdf, const std::filesystem::path& path);

struct KsResult {
  double d_plus = 0.0;
  double p = 1.0;
  bool exact = false;  // p from the permutation distribution
};

/// Above this product of sample sizes the asymptotic p-value is used.
inline constexpr std::int64_t kKsExactLimit = 25'000;

/// sup_t (F_emp(t) - F_hyp(t)) clamped at 0, for sorted inputs.
double ks_d_plus(std::span<const int> empirical_sorted, std::span<const int> hypothetical_sorted);

/// exp(-2 D^2 i h / (i + h)).
double ks_asymptotic_p(double d_plus, std::size_t i, std::size_t h);

/// P(D+ >= observed) over all equally likely splits of the pooled sample,
/// computed by a lattice-path recursion. Sorted inputs.
double ks_exact_p(std::span<const int> empirical_sorted, std::span<const int> hypothetical_sorted);

/// One-sided two-sample test: large p unless the empirical times are
/// shorter than the hypothetical ones. An empty empirical sample returns
/// (0, 1). The p-value is exact when i * h <= kKsExactLimit.
KsResult ks_one_sided(std::span<const int> empirical, std::span<const int> hypothetical);
KsResult ks_one_sided(std::span<const int> empirical, const HypotheticalCdf& hypothetical);

}  // namespace etl
