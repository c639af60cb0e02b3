#include "entver/statproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace entver {

MeasurementRecord::MeasurementRecord(std::vector<RecordEntry> entries, std::uint64_t seed) : seed_(seed) {
  for (auto& e : entries) add(e);
}

void MeasurementRecord::add(RecordEntry e) {
  // Increasing run ids are unique by construction; anything else gets a full scan.
  entries_.push_back(e);
  if (entries_.size() == 1 || entries_[entries_.size() - 2].run_id < e.run_id) return;
  std::unordered_set<int> seen;
  for (const auto& x : entries_) {
    if (!seen.insert(x.run_id).second) {
      entries_.pop_back();
      throw Error("duplicate run id in measurement record");
    }
  }
}

MeasurementRecord MeasurementRecord::without(const std::vector<char>& deleted) const {
  MeasurementRecord out;
  out.seed_ = seed_;
  for (const auto& e : entries_) {
    const auto id = static_cast<size_t>(e.run_id);
    if (id >= deleted.size() || !deleted[id]) out.entries_.push_back(e);
  }
  return out;
}

MeasurementRecord MeasurementRecord::permuted(std::uint64_t seed) const {
  MeasurementRecord out = *this;
  Rng rng(seed);
  std::shuffle(out.entries_.begin(), out.entries_.end(), rng);
  return out;
}

std::vector<int> proportional_quotas(const std::vector<double>& weights, int n_runs) {
  if (weights.empty()) throw Error("no settings to assign");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw Error("setting weights sum to zero");
  std::vector<int> q(weights.size());
  std::vector<std::pair<double, int>> rem;
  int used = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double exact = n_runs * weights[i] / total;
    q[i] = static_cast<int>(std::floor(exact));
    used += q[i];
    rem.push_back({exact - q[i], static_cast<int>(i)});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; used < n_runs; ++k, ++used) ++q[static_cast<size_t>(rem[static_cast<size_t>(k)].second)];
  return q;
}

std::vector<int> randomized_order(const std::vector<int>& quotas, std::uint64_t seed) {
  std::vector<int> out;
  for (size_t s = 0; s < quotas.size(); ++s) {
    if (quotas[s] < 0) throw Error("quota infeasible: negative count");
    out.insert(out.end(), static_cast<size_t>(quotas[s]), static_cast<int>(s));
  }
  if (out.empty()) throw Error("quota infeasible: no runs");
  Rng rng(derive_seed(seed, 0x6f72646572ULL));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<int> randomized_order(int n_settings, int n_runs, std::uint64_t seed) {
  if (n_settings < 1 || n_runs < n_settings) throw Error("quota infeasible: fewer runs than settings");
  std::vector<int> q(static_cast<size_t>(n_settings), n_runs / n_settings);
  for (int s = 0; s < n_runs % n_settings; ++s) ++q[static_cast<size_t>(s)];
  return randomized_order(q, seed);
}

Grouping random_groups(const std::vector<int>& runs, int m, std::uint64_t seed) {
  if (m < 2) throw Error("group size must be at least 2");
  if (static_cast<int>(runs.size()) < m) throw Error("fewer runs than the group size");
  std::vector<int> shuffled = runs;
  Rng rng(derive_seed(seed, 0x67726f7570ULL));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  // A uniform shuffle already randomizes the order inside each group.
  return consecutive_groups(shuffled, m);
}

Grouping random_groups(int n_runs, int m, std::uint64_t seed) {
  std::vector<int> runs(static_cast<size_t>(std::max(n_runs, 0)));
  std::iota(runs.begin(), runs.end(), 0);
  return random_groups(runs, m, seed);
}

Grouping consecutive_groups(const std::vector<int>& runs, int m) {
  if (m < 1) throw Error("group size must be positive");
  Grouping g;
  const size_t full = runs.size() / static_cast<size_t>(m) * static_cast<size_t>(m);
  for (size_t i = 0; i < full; i += static_cast<size_t>(m)) {
    g.groups.emplace_back(runs.begin() + static_cast<std::ptrdiff_t>(i), runs.begin() + static_cast<std::ptrdiff_t>(i + m));
  }
  g.discarded.assign(runs.begin() + static_cast<std::ptrdiff_t>(full), runs.end());
  return g;
}

StabilityResult deletion_stability(const SubsampleEstimator& estimator, Estimate full, int n_runs, double q, int k,
                                   std::uint64_t seed, Exec exec) {
  if (!(q > 0.0 && q < 1.0)) throw Error("deletion fraction must lie in (0, 1)");
  if (k < 2) throw Error("need at least two deletion trials");
  const int n_delete = static_cast<int>(std::floor(q * n_runs));
  if (n_runs - n_delete < 2) throw Error("subsample too small for estimator");

  StabilityResult out;
  out.trial_values.assign(static_cast<size_t>(k), 0.0);
  for_each_index(k, exec, [&](std::int64_t t) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(t));
    std::vector<int> ids(static_cast<size_t>(n_runs));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<int> kept(ids.begin() + n_delete, ids.end());
    std::sort(kept.begin(), kept.end());
    out.trial_values[static_cast<size_t>(t)] = estimator(kept, derive_seed(seed, 0x10000ULL + static_cast<std::uint64_t>(t))).value;
  });
  out.allowed = kStabilityFactor * full.se / std::sqrt(1.0 - q);
  bool finite = std::isfinite(full.value);
  for (double v : out.trial_values) {
    finite = finite && std::isfinite(v);
    out.spread = std::max(out.spread, std::abs(v - full.value));
  }
  out.stable = finite && out.spread <= out.allowed;
  return out;
}

}  // namespace entver
