#pragma once

// Joint quantum state of a stretch of runs, kept as a product of factors.
// Measuring slots that live in different factors merges those factors first;
// measured slots are removed afterwards, so factors stay small.

#include <memory>
#include <span>
#include <vector>

#include "entver/random.hpp"
#include "entver/sources.hpp"

namespace entver {

class SequenceState {
 public:
  /// All runs of the sequence.
  static SequenceState whole(const RunSequence& seq);
  /// Only the runs of block `b`. Slot ids stay global.
  static SequenceState block(const RunSequence& seq, int b);

  /// Samples an outcome of the POVM acting on `slots` (in that order). The
  /// measured slots are discarded and the remaining slots of the merged
  /// factor keep their state conditioned on the outcome.
  int measure(const std::vector<int>& slots, const std::vector<CMatrix>& povm, Rng& rng);

  /// Outcome probabilities without collapsing anything.
  std::vector<double> probabilities(const std::vector<int>& slots, const std::vector<CMatrix>& povm) const;

  /// Applies the pass Kraus operator `kraus` on `slots` with the matching
  /// probability. On pass the slots keep the filtered state; on fail they are
  /// discarded. Returns whether the filter passed.
  bool filter(const std::vector<int>& slots, const CMatrix& kraus, Rng& rng);

  /// Reduced state on `slots`, in the listed order.
  CMatrix reduced(const std::vector<int>& slots) const;

  void discard(const std::vector<int>& slots);

  bool holds(int slot) const;
  int slot_dim(int slot) const { return run_dims_[static_cast<size_t>(slot % 2)]; }

 private:
  struct Factor {
    std::shared_ptr<const DensityMatrix> shared;
    CMatrix own;
    bool owned = false;
    bool alive = true;
    Dims dims;
    std::vector<int> slots;
    const CMatrix& mat() const { return owned ? own : shared->mat(); }
  };

  SequenceState(const Dims& run_dims, std::span<const RunBlock> blocks, int first_run, int n_runs);

  int factor_of(int slot) const;
  int merge(const std::vector<int>& slots);
  /// Permutes factor `f` so that `slots` come first; returns the permuted matrix and dims of the rest.
  CMatrix targets_first(const Factor& f, const std::vector<int>& slots, std::vector<int>& rest_slots, Dims& rest_dims, int& dt) const;
  void replace(int f, CMatrix m, Dims dims, std::vector<int> slots);

  Dims run_dims_;
  int slot_base_ = 0;
  std::vector<Factor> factors_;
  std::vector<int> slot_factor_;  // -1 once discarded
};

/// Tr_targets[(E x I) rho] for rho with the target block first (dt x dt targets, rest dimension dr).
CMatrix contract_targets(const CMatrix& rho, const CMatrix& e, int dt);

}  // namespace entver
