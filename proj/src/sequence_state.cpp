#include "entver/sequence_state.hpp"

#include <algorithm>

namespace entver {

namespace {

struct Joint {
  CMatrix mat;
  Dims dims;
  std::vector<int> slots;
  std::vector<int> factors;
};

}  // namespace

CMatrix contract_targets(const CMatrix& rho, const CMatrix& e, int dt) {
  const auto dr = rho.rows() / dt;
  CMatrix out = CMatrix::Zero(dr, dr);
  for (int i = 0; i < dt; ++i) {
    for (int j = 0; j < dt; ++j) {
      const cplx c = e(i, j);
      if (c == cplx(0.0, 0.0)) continue;
      out += c * rho.block(j * dr, i * dr, dr, dr);
    }
  }
  return out;
}

SequenceState::SequenceState(const Dims& run_dims, std::span<const RunBlock> blocks, int first_run, int n_runs)
    : run_dims_(run_dims), slot_base_(2 * first_run), slot_factor_(static_cast<size_t>(2 * n_runs), -1) {
  for (const auto& b : blocks) {
    for (const auto& wf : b.factors) {
      Factor f;
      f.shared = wf.state;
      f.dims = wf.state->dims();
      for (const auto& s : wf.slots) {
        const int id = slot_id(b.first_run + s.run, s.side);
        f.slots.push_back(id);
        slot_factor_[static_cast<size_t>(id - slot_base_)] = static_cast<int>(factors_.size());
      }
      factors_.push_back(std::move(f));
    }
  }
}

SequenceState SequenceState::whole(const RunSequence& seq) {
  return SequenceState(seq.run_dims, seq.blocks, 0, seq.n_runs);
}

SequenceState SequenceState::block(const RunSequence& seq, int b) {
  const auto& blk = seq.blocks.at(static_cast<size_t>(b));
  return SequenceState(seq.run_dims, std::span<const RunBlock>(&blk, 1), blk.first_run, blk.length);
}

bool SequenceState::holds(int slot) const {
  const int k = slot - slot_base_;
  return k >= 0 && k < static_cast<int>(slot_factor_.size()) && slot_factor_[static_cast<size_t>(k)] >= 0;
}

int SequenceState::factor_of(int slot) const {
  if (!holds(slot)) throw Error("slot already measured or outside this state");
  return slot_factor_[static_cast<size_t>(slot - slot_base_)];
}

namespace {

Joint joint_of(const std::vector<int>& factor_ids, const auto& factors) {
  Joint j{CMatrix::Identity(1, 1), {}, {}, factor_ids};
  for (int fi : factor_ids) {
    const auto& f = factors[static_cast<size_t>(fi)];
    j.mat = tensor(j.mat, f.mat());
    j.dims.insert(j.dims.end(), f.dims.begin(), f.dims.end());
    j.slots.insert(j.slots.end(), f.slots.begin(), f.slots.end());
  }
  if (j.mat.rows() > kMaxDim) throw Error("joint factor exceeds dense limit of 256");
  return j;
}

}  // namespace

int SequenceState::merge(const std::vector<int>& slots) {
  std::vector<int> ids;
  for (int s : slots) {
    const int f = factor_of(s);
    if (std::find(ids.begin(), ids.end(), f) == ids.end()) ids.push_back(f);
  }
  if (ids.size() == 1) return ids.front();
  Joint j = joint_of(ids, factors_);
  for (int fi : ids) factors_[static_cast<size_t>(fi)].alive = false;
  Factor f;
  f.own = std::move(j.mat);
  f.owned = true;
  f.dims = std::move(j.dims);
  f.slots = std::move(j.slots);
  const int id = static_cast<int>(factors_.size());
  for (int s : f.slots) slot_factor_[static_cast<size_t>(s - slot_base_)] = id;
  factors_.push_back(std::move(f));
  return id;
}

CMatrix SequenceState::targets_first(const Factor& f, const std::vector<int>& slots, std::vector<int>& rest_slots,
                                     Dims& rest_dims, int& dt) const {
  std::vector<int> order;
  dt = 1;
  for (int s : slots) {
    const auto it = std::find(f.slots.begin(), f.slots.end(), s);
    if (it == f.slots.end()) throw Error("slot not in factor");
    if (std::find(order.begin(), order.end(), static_cast<int>(it - f.slots.begin())) != order.end()) throw Error("duplicate slot");
    order.push_back(static_cast<int>(it - f.slots.begin()));
    dt *= slot_dim(s);
  }
  rest_slots.clear();
  rest_dims.clear();
  for (int k = 0; k < static_cast<int>(f.slots.size()); ++k) {
    if (std::find(order.begin(), order.end(), k) == order.end()) {
      order.push_back(k);
      rest_slots.push_back(f.slots[static_cast<size_t>(k)]);
      rest_dims.push_back(f.dims[static_cast<size_t>(k)]);
    }
  }
  return permute_subsystems(f.mat(), f.dims, order);
}

void SequenceState::replace(int fi, CMatrix m, Dims dims, std::vector<int> slots) {
  auto& f = factors_[static_cast<size_t>(fi)];
  for (int s : f.slots) slot_factor_[static_cast<size_t>(s - slot_base_)] = -1;
  if (slots.empty()) {
    f.alive = false;
    f.slots.clear();
    return;
  }
  f.shared.reset();
  f.own = std::move(m);
  f.owned = true;
  f.dims = std::move(dims);
  f.slots = std::move(slots);
  for (int s : f.slots) slot_factor_[static_cast<size_t>(s - slot_base_)] = fi;
}

std::vector<double> SequenceState::probabilities(const std::vector<int>& slots, const std::vector<CMatrix>& povm) const {
  std::vector<int> ids;
  for (int s : slots) {
    const int f = factor_of(s);
    if (std::find(ids.begin(), ids.end(), f) == ids.end()) ids.push_back(f);
  }
  Joint j = joint_of(ids, factors_);
  Factor tmp;
  tmp.own = std::move(j.mat);
  tmp.owned = true;
  tmp.dims = std::move(j.dims);
  tmp.slots = std::move(j.slots);
  std::vector<int> rest;
  Dims rest_dims;
  int dt = 0;
  const CMatrix p = targets_first(tmp, slots, rest, rest_dims, dt);
  std::vector<double> out;
  out.reserve(povm.size());
  for (const auto& e : povm) {
    if (e.rows() != dt) throw Error("POVM size does not match the measured slots");
    out.push_back(std::max(0.0, contract_targets(p, e, dt).trace().real()));
  }
  return out;
}

int SequenceState::measure(const std::vector<int>& slots, const std::vector<CMatrix>& povm, Rng& rng) {
  const int fi = merge(slots);
  std::vector<int> rest;
  Dims rest_dims;
  int dt = 0;
  const CMatrix p = targets_first(factors_[static_cast<size_t>(fi)], slots, rest, rest_dims, dt);
  std::vector<CMatrix> post;
  std::vector<double> w;
  post.reserve(povm.size());
  for (const auto& e : povm) {
    if (e.rows() != dt) throw Error("POVM size does not match the measured slots");
    post.push_back(contract_targets(p, e, dt));
    w.push_back(std::max(0.0, post.back().trace().real()));
  }
  const int o = sample_index(w, rng);
  CMatrix m = post[static_cast<size_t>(o)] / w[static_cast<size_t>(o)];
  replace(fi, 0.5 * (m + m.adjoint()), std::move(rest_dims), std::move(rest));
  return o;
}

bool SequenceState::filter(const std::vector<int>& slots, const CMatrix& kraus, Rng& rng) {
  const int fi = merge(slots);
  std::vector<int> rest;
  Dims rest_dims;
  int dt = 0;
  const CMatrix p = targets_first(factors_[static_cast<size_t>(fi)], slots, rest, rest_dims, dt);
  if (kraus.rows() != dt) throw Error("filter size does not match the slots");
  const auto dr = p.rows() / dt;
  const CMatrix k_full = tensor(kraus, CMatrix::Identity(dr, dr));
  const CMatrix pass = k_full * p * k_full.adjoint();
  const double p_pass = std::clamp(pass.trace().real(), 0.0, 1.0);
  const bool passed = uniform01(rng) < p_pass;
  if (passed) {
    // Slots keep their order: targets first, then the rest.
    std::vector<int> all = slots;
    all.insert(all.end(), rest.begin(), rest.end());
    Dims dims;
    for (int s : slots) dims.push_back(slot_dim(s));
    dims.insert(dims.end(), rest_dims.begin(), rest_dims.end());
    CMatrix m = pass / p_pass;
    replace(fi, 0.5 * (m + m.adjoint()), std::move(dims), std::move(all));
  } else {
    const CMatrix fail_effect = CMatrix::Identity(dt, dt) - kraus.adjoint() * kraus;
    CMatrix m = contract_targets(p, fail_effect, dt);
    const double tr = m.trace().real();
    m = tr > 0.0 ? CMatrix(m / tr) : CMatrix(m);
    replace(fi, 0.5 * (m + m.adjoint()), std::move(rest_dims), std::move(rest));
  }
  return passed;
}

void SequenceState::discard(const std::vector<int>& slots) {
  for (int s : slots) {
    const int fi = factor_of(s);
    auto& f = factors_[static_cast<size_t>(fi)];
    std::vector<int> keep;
    std::vector<int> kept_slots;
    Dims kept_dims;
    for (int k = 0; k < static_cast<int>(f.slots.size()); ++k) {
      if (f.slots[static_cast<size_t>(k)] != s) {
        keep.push_back(k);
        kept_slots.push_back(f.slots[static_cast<size_t>(k)]);
        kept_dims.push_back(f.dims[static_cast<size_t>(k)]);
      }
    }
    CMatrix m = keep.empty() ? CMatrix() : partial_trace(f.mat(), f.dims, keep);
    replace(fi, std::move(m), std::move(kept_dims), std::move(kept_slots));
  }
}

CMatrix SequenceState::reduced(const std::vector<int>& slots) const {
  std::vector<int> ids;
  std::vector<std::vector<int>> positions;
  std::vector<std::pair<int, int>> located;
  for (int s : slots) {
    const int fi = factor_of(s);
    auto it = std::find(ids.begin(), ids.end(), fi);
    int g = static_cast<int>(it - ids.begin());
    if (it == ids.end()) {
      ids.push_back(fi);
      positions.emplace_back();
    }
    const auto& fs = factors_[static_cast<size_t>(fi)].slots;
    const int pos = static_cast<int>(std::find(fs.begin(), fs.end(), s) - fs.begin());
    located.push_back({g, static_cast<int>(positions[static_cast<size_t>(g)].size())});
    positions[static_cast<size_t>(g)].push_back(pos);
  }
  CMatrix out = CMatrix::Identity(1, 1);
  std::vector<int> offset(ids.size(), 0);
  int running = 0;
  for (size_t g = 0; g < ids.size(); ++g) {
    const auto& f = factors_[static_cast<size_t>(ids[g])];
    out = tensor(out, partial_trace(f.mat(), f.dims, positions[g]));
    offset[g] = running;
    running += static_cast<int>(positions[g].size());
  }
  std::vector<int> order(slots.size());
  Dims dims(slots.size());
  for (size_t q = 0; q < slots.size(); ++q) {
    const int pos = offset[static_cast<size_t>(located[q].first)] + located[q].second;
    order[q] = pos;
    dims[static_cast<size_t>(pos)] = slot_dim(slots[q]);
  }
  return permute_subsystems(out, dims, order);
}

}  // namespace entver
