#pragma once

// State-generation processes: honest sources (a priori, heralded,
// a posteriori, phase-drifting, dual-rail, De Finetti mixtures) and the
// adversarial block-correlated sources that fool naive verifiers.
//
// A run holds one A slot and one B slot. A block of runs is emitted as a
// classical mixture of components; each component is a set of factor states
// wired onto the block's slots. Nothing is ever entangled across blocks.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "entver/qmat.hpp"

namespace entver {

inline constexpr int kSideA = 0;
inline constexpr int kSideB = 1;

struct SlotRef {
  int run = 0;   // run index within the block
  int side = 0;  // kSideA or kSideB
};

/// Subsystem k of `state` sits in slot `slots[k]`.
struct WiredFactor {
  std::shared_ptr<const DensityMatrix> state;
  std::vector<SlotRef> slots;
};

struct BlockComponent {
  double prob = 0.0;
  std::vector<WiredFactor> factors;
  std::vector<int> herald;  // per-run classical label; empty when the source has none
};

struct BlockEnsemble {
  int block_len = 1;
  std::vector<BlockComponent> components;

  /// Checks probabilities, slot coverage and slot dimensions.
  void validate(const Dims& run_dims) const;
};

enum class PhaseLaw { uniform, random_walk };

struct PhaseDrift {
  PhaseLaw law = PhaseLaw::uniform;
  double step_sigma = 0.0;  // random-walk step standard deviation (radians)
  bool leak_phase_to_verifier = false;
};

/// A realized block: the component drawn and its factors, wired to block-local runs.
struct RunBlock {
  int first_run = 0;
  int length = 0;
  int component = -1;
  std::vector<WiredFactor> factors;
  std::vector<int> herald;    // per run, empty if none
  std::vector<double> phase;  // per run, empty unless the source drifts in phase
};

struct RunSequence {
  Dims run_dims;  // {dA, dB}
  int n_runs = 0;
  bool phase_leaked = false;
  std::vector<RunBlock> blocks;

  int slot_count() const { return 2 * n_runs; }
};

inline int slot_id(int run, int side) { return 2 * run + side; }

class SourceProcess {
 public:
  SourceProcess(std::string kind, Dims run_dims, BlockEnsemble ensemble, bool iid);
  SourceProcess(std::string kind, PhaseDrift drift);

  const std::string& kind() const { return kind_; }
  const Dims& run_dims() const { return run_dims_; }
  int block_len() const { return ensemble_ ? ensemble_->block_len : 1; }
  bool is_iid() const { return iid_; }
  bool has_herald() const { return has_herald_; }
  const std::optional<BlockEnsemble>& ensemble() const { return ensemble_; }
  const std::optional<PhaseDrift>& phase_drift() const { return drift_; }

  /// Per-run A-B state averaged over components and block positions.
  const DensityMatrix& marginal() const { return marginal_; }

  /// Per-run state in the frame of an analyzer that co-rotates with a leaked
  /// phase. Equals `marginal()` for every source without a leaked phase.
  DensityMatrix co_rotating_marginal() const;

  /// Probability of herald label `label` and the run state conditioned on it.
  double herald_probability(int label) const;
  DensityMatrix conditional_marginal(int label) const;

  /// True cross A-B entanglement of a run. Concurrence for two qubits,
  /// twice the negativity otherwise. Sources with a herald label count the
  /// label as side information: the herald-averaged value is reported.
  double ground_truth_entanglement() const { return ground_truth_; }

  /// Deterministic in (n, seed). The last block is truncated to fit n runs.
  RunSequence sample_runs(int n, std::uint64_t seed) const;

 private:
  void finish_construction();

  std::string kind_;
  Dims run_dims_;
  bool iid_ = true;
  bool has_herald_ = false;
  std::optional<BlockEnsemble> ensemble_;
  std::optional<PhaseDrift> drift_;
  DensityMatrix marginal_;
  double ground_truth_ = 0.0;
};

/// Reduced state of a set of wired factors on `slots` (ordered as listed).
CMatrix reduced_on_slots(const std::vector<WiredFactor>& factors, const std::vector<SlotRef>& slots, const Dims& run_dims);

/// Truncates a realized block to its first `length` runs.
RunBlock truncate_block(const RunBlock& block, int length, const Dims& run_dims);

/// Per-run marginal entanglement measure used for ground truth.
double run_entanglement(const DensityMatrix& rho);

/// (|01> + e^{i phi}|10>)/sqrt(2).
CVector phase_ket(double phi);

enum class DualRailVariant { entangled, product };

namespace sources {

SourceProcess werner(double alpha);
SourceProcess a_priori(const DensityMatrix& rho);
SourceProcess heralded(double p_yes, const DensityMatrix& rho_ent, const DensityMatrix& rho_unent);
/// Per side a three-level system: levels 0 and 1 carry the qubit, level 2 is the
/// no-click flag. rho_flag defaults to |22><22|.
SourceProcess a_posteriori(double p, const DensityMatrix& rho_ent, std::optional<DensityMatrix> rho_flag = std::nullopt);
SourceProcess phase_mixed(PhaseDrift drift);
/// Photon numbers 0..2 per mode. The entangled variant is (|01> + e^{i phi}|10>)/sqrt(2);
/// the product variant is (|0> + eps e^{i phi}|1>)_A (|0> + eps|1>)_B, normalized.
SourceProcess dual_rail(DualRailVariant variant, double epsilon, double phi);
/// Each run independently draws state k with probability weights[k].
SourceProcess definetti(const std::vector<double>& weights, const std::vector<DensityMatrix>& states);

SourceProcess singlet_fraction();
SourceProcess cross_side_correlated();
SourceProcess anti_grouping(int m);

}  // namespace sources

}  // namespace entver
