#include "entver/sources.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "entver/measures.hpp"
#include "entver/random.hpp"

namespace entver {

namespace {

using StatePtr = std::shared_ptr<const DensityMatrix>;

StatePtr share(DensityMatrix rho) { return std::make_shared<const DensityMatrix>(std::move(rho)); }

StatePtr ket_state(const CVector& v, Dims dims) {
  return share(DensityMatrix(std::move(dims), v * v.adjoint()));
}

StatePtr qubit_basis_state(int k) { return ket_state(basis_ket(2, k), {2}); }

BlockComponent single_run_component(double prob, StatePtr rho) {
  return BlockComponent{prob, {WiredFactor{std::move(rho), {{0, kSideA}, {0, kSideB}}}}, {}};
}

}  // namespace

CVector phase_ket(double phi) {
  CVector v = CVector::Zero(4);
  v(1) = 1.0 / std::numbers::sqrt2;
  v(2) = std::polar(1.0 / std::numbers::sqrt2, phi);
  return v;
}

double run_entanglement(const DensityMatrix& rho) {
  if (rho.dims() == Dims{2, 2}) return concurrence(rho).concurrence;
  return 2.0 * negativity(rho);
}

void BlockEnsemble::validate(const Dims& run_dims) const {
  if (block_len < 1) throw Error("block length must be positive");
  if (components.empty()) throw Error("block ensemble has no components");
  if (run_dims.size() != 2) throw Error("runs must have an A and a B slot");
  double total = 0.0;
  const bool labelled = !components.front().herald.empty();
  for (const auto& c : components) {
    if (!(c.prob >= 0.0)) throw Error("negative component probability");
    total += c.prob;
    if (labelled != !c.herald.empty()) throw Error("herald labels must be given for all components or none");
    if (labelled && static_cast<int>(c.herald.size()) != block_len) throw Error("herald labels must cover every run");
    std::vector<int> covered(static_cast<size_t>(2 * block_len), 0);
    for (const auto& f : c.factors) {
      if (!f.state) throw Error("missing factor state");
      if (static_cast<int>(f.slots.size()) != f.state->subsystems()) throw Error("factor wiring does not match its subsystems");
      for (size_t k = 0; k < f.slots.size(); ++k) {
        const SlotRef s = f.slots[k];
        if (s.run < 0 || s.run >= block_len || (s.side != kSideA && s.side != kSideB)) throw Error("factor wired to a slot outside the block");
        if (f.state->dims()[k] != run_dims[static_cast<size_t>(s.side)]) throw Error("factor dimension does not match its slot");
        ++covered[static_cast<size_t>(slot_id(s.run, s.side))];
      }
    }
    for (int n : covered) {
      if (n != 1) throw Error("every slot must be covered exactly once per component");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("component probabilities must sum to 1");
}

CMatrix reduced_on_slots(const std::vector<WiredFactor>& factors, const std::vector<SlotRef>& slots, const Dims& run_dims) {
  // Group the requested slots by the factor holding them.
  std::vector<int> group_of_factor(factors.size(), -1);
  std::vector<std::pair<int, std::vector<int>>> groups;  // factor index, positions within factor
  std::vector<std::pair<int, int>> located(slots.size());
  for (size_t q = 0; q < slots.size(); ++q) {
    bool found = false;
    for (size_t fi = 0; fi < factors.size() && !found; ++fi) {
      const auto& fs = factors[fi].slots;
      for (size_t k = 0; k < fs.size(); ++k) {
        if (fs[k].run == slots[q].run && fs[k].side == slots[q].side) {
          if (group_of_factor[fi] < 0) {
            group_of_factor[fi] = static_cast<int>(groups.size());
            groups.push_back({static_cast<int>(fi), {}});
          }
          auto& g = groups[static_cast<size_t>(group_of_factor[fi])];
          located[q] = {group_of_factor[fi], static_cast<int>(g.second.size())};
          g.second.push_back(static_cast<int>(k));
          found = true;
          break;
        }
      }
    }
    if (!found) throw Error("slot not held by any factor");
  }

  CMatrix out = CMatrix::Identity(1, 1);
  std::vector<int> offset(groups.size(), 0);
  int running = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    const auto& f = factors[static_cast<size_t>(groups[g].first)];
    out = tensor(out, partial_trace(f.state->mat(), f.state->dims(), groups[g].second));
    offset[g] = running;
    running += static_cast<int>(groups[g].second.size());
  }
  std::vector<int> order(slots.size());
  Dims current_dims(slots.size());
  for (size_t q = 0; q < slots.size(); ++q) {
    const int pos = offset[static_cast<size_t>(located[q].first)] + located[q].second;
    order[q] = pos;
    current_dims[static_cast<size_t>(pos)] = run_dims[static_cast<size_t>(slots[q].side)];
  }
  return permute_subsystems(out, current_dims, order);
}

RunBlock truncate_block(const RunBlock& block, int length, const Dims& run_dims) {
  if (length >= block.length) return block;
  RunBlock out;
  out.first_run = block.first_run;
  out.length = length;
  out.component = block.component;
  if (!block.herald.empty()) out.herald.assign(block.herald.begin(), block.herald.begin() + length);
  if (!block.phase.empty()) out.phase.assign(block.phase.begin(), block.phase.begin() + length);
  for (const auto& f : block.factors) {
    std::vector<int> keep;
    std::vector<SlotRef> kept_slots;
    for (size_t k = 0; k < f.slots.size(); ++k) {
      if (f.slots[k].run < length) {
        keep.push_back(static_cast<int>(k));
        kept_slots.push_back(f.slots[k]);
      }
    }
    if (keep.empty()) continue;
    if (keep.size() == f.slots.size()) {
      out.factors.push_back(f);
      continue;
    }
    out.factors.push_back(WiredFactor{share(partial_trace(*f.state, keep)), kept_slots});
  }
  (void)run_dims;
  return out;
}

SourceProcess::SourceProcess(std::string kind, Dims run_dims, BlockEnsemble ensemble, bool iid)
    : kind_(std::move(kind)),
      run_dims_(std::move(run_dims)),
      iid_(iid),
      ensemble_(std::move(ensemble)),
      marginal_(DensityMatrix::maximally_mixed(run_dims_)) {
  ensemble_->validate(run_dims_);
  has_herald_ = !ensemble_->components.front().herald.empty();
  finish_construction();
}

SourceProcess::SourceProcess(std::string kind, PhaseDrift drift)
    : kind_(std::move(kind)),
      run_dims_({2, 2}),
      iid_(drift.law == PhaseLaw::uniform),
      drift_(drift),
      marginal_(DensityMatrix::maximally_mixed({2, 2})) {
  if (drift.law == PhaseLaw::random_walk && !(drift.step_sigma > 0.0)) throw Error("random-walk phase needs a positive step");
  finish_construction();
}

void SourceProcess::finish_construction() {
  if (drift_) {
    // Averaging e^{i phi} over a uniform phase (or a walk started uniformly) kills the coherences.
    CMatrix m = CMatrix::Zero(4, 4);
    m(1, 1) = 0.5;
    m(2, 2) = 0.5;
    marginal_ = DensityMatrix({2, 2}, m);
    ground_truth_ = run_entanglement(marginal_);
    return;
  }
  const auto& e = *ensemble_;
  const int d = total_dim(run_dims_);
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& c : e.components) {
    if (c.prob == 0.0) continue;
    for (int r = 0; r < e.block_len; ++r) acc += c.prob * reduced_on_slots(c.factors, {{r, kSideA}, {r, kSideB}}, run_dims_);
  }
  marginal_ = DensityMatrix::normalized(run_dims_, acc / static_cast<double>(e.block_len));
  if (!has_herald_) {
    ground_truth_ = run_entanglement(marginal_);
    return;
  }
  std::map<int, bool> labels;
  for (const auto& c : e.components) {
    for (int h : c.herald) labels[h] = true;
  }
  double gt = 0.0;
  for (const auto& [label, unused] : labels) {
    const double p = herald_probability(label);
    if (p > 0.0) gt += p * run_entanglement(conditional_marginal(label));
  }
  ground_truth_ = gt;
}

DensityMatrix SourceProcess::co_rotating_marginal() const {
  if (drift_ && drift_->leak_phase_to_verifier) return DensityMatrix({2, 2}, phase_ket(0.0) * phase_ket(0.0).adjoint());
  return marginal_;
}

double SourceProcess::herald_probability(int label) const {
  if (!has_herald_) throw Error("source has no herald label");
  const auto& e = *ensemble_;
  double p = 0.0;
  for (const auto& c : e.components) {
    for (int r = 0; r < e.block_len; ++r) {
      if (c.herald[static_cast<size_t>(r)] == label) p += c.prob;
    }
  }
  return p / static_cast<double>(e.block_len);
}

DensityMatrix SourceProcess::conditional_marginal(int label) const {
  if (!has_herald_) throw Error("source has no herald label");
  const auto& e = *ensemble_;
  const int d = total_dim(run_dims_);
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& c : e.components) {
    for (int r = 0; r < e.block_len; ++r) {
      if (c.herald[static_cast<size_t>(r)] == label && c.prob > 0.0) {
        acc += c.prob * reduced_on_slots(c.factors, {{r, kSideA}, {r, kSideB}}, run_dims_);
      }
    }
  }
  if (!(acc.trace().real() > 0.0)) throw Error("herald label never occurs");
  return DensityMatrix::normalized(run_dims_, acc);
}

RunSequence SourceProcess::sample_runs(int n, std::uint64_t seed) const {
  if (n < 1) throw Error("need at least one run");
  RunSequence seq;
  seq.run_dims = run_dims_;
  seq.n_runs = n;
  if (drift_) {
    seq.phase_leaked = drift_->leak_phase_to_verifier;
    Rng rng = substream(seed, 0);
    std::normal_distribution<double> step(0.0, drift_->law == PhaseLaw::random_walk ? drift_->step_sigma : 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    double phi = two_pi * uniform01(rng);
    seq.blocks.reserve(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
      if (r > 0) {
        phi = drift_->law == PhaseLaw::uniform ? two_pi * uniform01(rng) : std::fmod(phi + step(rng) + two_pi, two_pi);
        if (phi < 0.0) phi += two_pi;
      }
      RunBlock b;
      b.first_run = r;
      b.length = 1;
      b.component = 0;
      b.factors.push_back(WiredFactor{ket_state(phase_ket(phi), {2, 2}), {{0, kSideA}, {0, kSideB}}});
      b.phase.push_back(phi);
      seq.blocks.push_back(std::move(b));
    }
    return seq;
  }
  const auto& e = *ensemble_;
  std::vector<double> weights;
  for (const auto& c : e.components) weights.push_back(c.prob);
  const int n_blocks = (n + e.block_len - 1) / e.block_len;
  seq.blocks.reserve(static_cast<size_t>(n_blocks));
  for (int b = 0; b < n_blocks; ++b) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(b));
    const int k = sample_index(weights, rng);
    const auto& c = e.components[static_cast<size_t>(k)];
    RunBlock blk;
    blk.first_run = b * e.block_len;
    blk.length = e.block_len;
    blk.component = k;
    blk.factors = c.factors;
    blk.herald = c.herald;
    const int remaining = n - blk.first_run;
    if (remaining < e.block_len) blk = truncate_block(blk, remaining, run_dims_);
    seq.blocks.push_back(std::move(blk));
  }
  return seq;
}

namespace sources {

SourceProcess a_priori(const DensityMatrix& rho) {
  if (rho.subsystems() != 2) throw Error("a priori source needs a bipartite run state");
  BlockEnsemble e{1, {single_run_component(1.0, share(rho))}};
  return SourceProcess("a_priori", rho.dims(), std::move(e), true);
}

SourceProcess werner(double alpha) {
  BlockEnsemble e{1, {single_run_component(1.0, share(werner_state(alpha)))}};
  return SourceProcess("werner", {2, 2}, std::move(e), true);
}

SourceProcess heralded(double p_yes, const DensityMatrix& rho_ent, const DensityMatrix& rho_unent) {
  if (!(p_yes >= 0.0 && p_yes <= 1.0)) throw Error("herald probability outside [0, 1]");
  if (rho_ent.dims() != rho_unent.dims() || rho_ent.subsystems() != 2) throw Error("heralded states must share bipartite dimensions");
  BlockComponent yes = single_run_component(p_yes, share(rho_ent));
  yes.herald = {1};
  BlockComponent no = single_run_component(1.0 - p_yes, share(rho_unent));
  no.herald = {0};
  BlockEnsemble e{1, {yes, no}};
  return SourceProcess("heralded", rho_ent.dims(), std::move(e), true);
}

SourceProcess a_posteriori(double p, const DensityMatrix& rho_ent, std::optional<DensityMatrix> rho_flag) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("success probability outside [0, 1]");
  if (rho_ent.dims() != Dims{2, 2}) throw Error("a posteriori source embeds a two-qubit state");
  if (!rho_flag) {
    const CVector v = tensor(basis_ket(3, 2), basis_ket(3, 2));
    rho_flag = DensityMatrix({3, 3}, v * v.adjoint());
  }
  if (rho_flag->dims() != Dims{3, 3}) throw Error("flag state must live on two three-level systems");
  CMatrix iso = CMatrix::Zero(9, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) iso(3 * a + b, 2 * a + b) = 1.0;
  }
  const CMatrix m = p * iso * rho_ent.mat() * iso.adjoint() + (1.0 - p) * rho_flag->mat();
  BlockEnsemble e{1, {single_run_component(1.0, share(DensityMatrix::normalized({3, 3}, m)))}};
  return SourceProcess("a_posteriori", {3, 3}, std::move(e), true);
}

SourceProcess phase_mixed(PhaseDrift drift) { return SourceProcess("phase_mixed", drift); }

SourceProcess dual_rail(DualRailVariant variant, double epsilon, double phi) {
  if (!(epsilon > 0.0 && epsilon <= 0.3)) throw Error("epsilon must lie in (0, 0.3]");
  CVector v;
  if (variant == DualRailVariant::entangled) {
    v = (tensor(basis_ket(3, 0), basis_ket(3, 1)) + std::polar(1.0, phi) * tensor(basis_ket(3, 1), basis_ket(3, 0))) /
        std::numbers::sqrt2;
  } else {
    CVector a = basis_ket(3, 0) + std::polar(epsilon, phi) * basis_ket(3, 1);
    CVector b = basis_ket(3, 0) + epsilon * basis_ket(3, 1);
    v = tensor(CVector(a / a.norm()), CVector(b / b.norm()));
  }
  BlockEnsemble e{1, {single_run_component(1.0, ket_state(v, {3, 3}))}};
  return SourceProcess("dual_rail", {3, 3}, std::move(e), true);
}

SourceProcess definetti(const std::vector<double>& weights, const std::vector<DensityMatrix>& states) {
  if (weights.empty() || weights.size() != states.size()) throw Error("De Finetti source needs matching weights and states");
  BlockEnsemble e{1, {}};
  for (size_t k = 0; k < weights.size(); ++k) {
    if (states[k].dims() != states.front().dims() || states[k].subsystems() != 2) throw Error("De Finetti states must share bipartite dimensions");
    e.components.push_back(single_run_component(weights[k], share(states[k])));
  }
  return SourceProcess("definetti", states.front().dims(), std::move(e), true);
}

namespace {

SourceProcess paired_cheat(const std::string& kind, bool bob_mirrors) {
  const StatePtr s = share(singlet());
  const StatePtr zero = qubit_basis_state(0);
  const StatePtr one = qubit_basis_state(1);
  auto pair_on = [&](int side, const StatePtr& singlet_or_null, const StatePtr& level) {
    std::vector<WiredFactor> f;
    if (singlet_or_null) {
      f.push_back(WiredFactor{singlet_or_null, {{0, side}, {1, side}}});
    } else {
      f.push_back(WiredFactor{level, {{0, side}}});
      f.push_back(WiredFactor{level, {{1, side}}});
    }
    return f;
  };
  auto component = [&](double prob, const StatePtr& a_singlet, const StatePtr& a_level) {
    BlockComponent c{prob, pair_on(kSideA, a_singlet, a_level), {}};
    const auto bob = bob_mirrors ? pair_on(kSideB, a_singlet, a_level) : pair_on(kSideB, nullptr, zero);
    c.factors.insert(c.factors.end(), bob.begin(), bob.end());
    return c;
  };
  BlockEnsemble e{2, {component(0.25, s, nullptr), component(0.375, nullptr, zero), component(0.375, nullptr, one)}};
  return SourceProcess(kind, {2, 2}, std::move(e), false);
}

}  // namespace

SourceProcess singlet_fraction() { return paired_cheat("singlet_fraction", false); }

SourceProcess cross_side_correlated() { return paired_cheat("cross_side_correlated", true); }

SourceProcess anti_grouping(int m) {
  if (m < 2 || m > 64 || m % 2 != 0) throw Error("unsupported group size for anti_grouping (even, 2..64)");
  const double axes[6][3] = {{0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  std::vector<StatePtr> pure;
  for (const auto& n : axes) pure.push_back(ket_state(bloch_ket(n[0], n[1], n[2]), {2}));
  auto opposite = [](int k) { return k ^ 1; };
  BlockEnsemble e{m, {}};
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      BlockComponent c{1.0 / 36.0, {}, {}};
      for (int r = 0; r < m; ++r) {
        const int ka = r % 2 == 0 ? a : opposite(a);
        const int kb = r % 2 == 0 ? b : opposite(b);
        c.factors.push_back(WiredFactor{pure[static_cast<size_t>(ka)], {{r, kSideA}}});
        c.factors.push_back(WiredFactor{pure[static_cast<size_t>(kb)], {{r, kSideB}}});
      }
      e.components.push_back(std::move(c));
    }
  }
  return SourceProcess("anti_grouping", {2, 2}, std::move(e), false);
}

}  // namespace sources

}  // namespace entver
