#pragma once

// Procedural safeguards against non-IID sources: randomized setting order,
// random grouping of copies and deletion stability.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entver/kernels.hpp"
#include "entver/random.hpp"

namespace entver {

struct RecordEntry {
  int run_id = 0;
  int block_id = 0;
  int setting = 0;
  int outcome = 0;
};

/// Ordered measurement data. Run ids are unique.
class MeasurementRecord {
 public:
  MeasurementRecord() = default;
  MeasurementRecord(std::vector<RecordEntry> entries, std::uint64_t seed);

  void add(RecordEntry e);
  const std::vector<RecordEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// Entries whose run id is not in `deleted` (a flag per run id).
  MeasurementRecord without(const std::vector<char>& deleted) const;
  MeasurementRecord permuted(std::uint64_t seed) const;

 private:
  std::vector<RecordEntry> entries_;
  std::uint64_t seed_ = 0;
};

/// Quotas proportional to `weights`, largest remainders first (ties to the lower index).
std::vector<int> proportional_quotas(const std::vector<double>& weights, int n_runs);

/// Random assignment run -> setting honoring per-setting quotas.
std::vector<int> randomized_order(const std::vector<int>& quotas, std::uint64_t seed);
/// Equal quotas over `n_settings` (the first n mod n_settings settings get one extra).
std::vector<int> randomized_order(int n_settings, int n_runs, std::uint64_t seed);

struct Grouping {
  std::vector<std::vector<int>> groups;
  std::vector<int> discarded;
};

/// Disjoint random groups of size m with random internal order; leftovers discarded.
Grouping random_groups(const std::vector<int>& runs, int m, std::uint64_t seed);
Grouping random_groups(int n_runs, int m, std::uint64_t seed);
/// Consecutive groups in the given order; leftovers discarded.
Grouping consecutive_groups(const std::vector<int>& runs, int m);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Statistic recomputed on the runs that survive a deletion. `kept` lists the
/// surviving run ids in increasing order; `trial_seed` seeds any resimulation.
using SubsampleEstimator = std::function<Estimate(const std::vector<int>& kept, std::uint64_t trial_seed)>;

struct StabilityResult {
  bool stable = false;
  double spread = 0.0;
  double allowed = 0.0;
  std::vector<double> trial_values;
};

inline constexpr double kStabilityFactor = 3.0;

/// Deletes a random fraction q of the n runs, k times; stable iff every
/// recomputed statistic lies within kStabilityFactor * full.se / sqrt(1 - q)
/// of the full-data value.
StabilityResult deletion_stability(const SubsampleEstimator& estimator, Estimate full, int n_runs, double q, int k,
                                   std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace entver
