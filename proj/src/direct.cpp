#include "entver/protocols/direct.hpp"

#include <cmath>
#include <string>

#include "entver/protocols/tomography.hpp"
#include "entver/random.hpp"
#include "entver/sequence_state.hpp"
#include "entver/statproc.hpp"

namespace entver {

namespace {

constexpr double kExactTol = 1e-10;

struct PairRecord {
  int r1 = 0;
  int r2 = 0;
  bool anti_a = false;
  bool anti_b = false;
};

struct PairCounts {
  double n = 0.0;
  double anti_a = 0.0;
  double anti_b = 0.0;
  double violations = 0.0;  // exactly one side antisymmetric
};

PairCounts count(const std::vector<PairRecord>& records, std::size_t begin, std::size_t end, const std::vector<char>* deleted = nullptr) {
  PairCounts c;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& p = records[i];
    if (deleted && ((*deleted)[static_cast<size_t>(p.r1)] || (*deleted)[static_cast<size_t>(p.r2)])) continue;
    c.n += 1.0;
    c.anti_a += p.anti_a;
    c.anti_b += p.anti_b;
    c.violations += p.anti_a != p.anti_b;
  }
  return c;
}

double proportion_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n); }

/// C = 2 sqrt(P) with a delta-method error.
Estimate concurrence_from_pa(double p, double n) {
  const double se_p = proportion_se(p, n);
  if (p <= 0.0) return {0.0, 2.0 * std::sqrt(se_p)};
  return {2.0 * std::sqrt(p), se_p / std::sqrt(p)};
}

std::vector<PairRecord> simulate_pairs(const RunSequence& seq, const std::vector<std::vector<int>>& pairs, bool both_sides,
                                       std::uint64_t seed) {
  const CMatrix anti = singlet().mat();
  const std::vector<CMatrix> povm = {anti, CMatrix::Identity(4, 4) - anti};
  SequenceState state = SequenceState::whole(seq);
  std::vector<PairRecord> out;
  out.reserve(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    Rng rng = substream(seed, j);
    PairRecord rec{pairs[j][0], pairs[j][1], false, false};
    rec.anti_a = state.measure({slot_id(rec.r1, kSideA), slot_id(rec.r2, kSideA)}, povm, rng) == 0;
    if (both_sides) rec.anti_b = state.measure({slot_id(rec.r1, kSideB), slot_id(rec.r2, kSideB)}, povm, rng) == 0;
    out.push_back(rec);
  }
  return out;
}

std::vector<std::vector<int>> consecutive_pairs(int first, int count) {
  std::vector<std::vector<int>> pairs;
  for (int r = first; r + 1 < first + count; r += 2) pairs.push_back({r, r + 1});
  return pairs;
}

}  // namespace

CriteriaAudit DirectOptions::audit() const {
  CriteriaAudit a;
  if (compliant) {
    a.notes.push_back("two-copy statistic backed by pairing, correlation, deletion and tomography checks");
    return a;
  }
  a.violate(1, "C = 2 sqrt(P_a) assumes two identical pure copies");
  a.violate(3, "copies assumed independent without exchangeability or deletion checks");
  if (pairing == Pairing::fixed_consecutive) a.notes.push_back("pairing predictable to the source");
  return a;
}

PairProbabilities pair_probabilities(const CMatrix& pair_state) {
  if (pair_state.rows() != 16) throw Error("pair state must be two qubit pairs");
  const Dims dims = {2, 2, 2, 2};
  const CMatrix anti = singlet().mat();
  const int on_a[2] = {0, 2};
  const int on_b[2] = {1, 3};
  const CMatrix pa = embed_operator(anti, dims, on_a);
  const CMatrix pb = embed_operator(anti, dims, on_b);
  PairProbabilities p;
  p.anti_a = (pair_state * pa).trace().real();
  p.anti_b = (pair_state * pb).trace().real();
  p.anti_both = (pair_state * pa * pb).trace().real();
  return p;
}

CMatrix exact_pair_state(const SourceProcess& src, Pairing pairing) {
  if (src.run_dims() != Dims{2, 2}) throw Error("two-copy measurement needs qubit-pair runs");
  if (pairing == Pairing::random || src.is_iid()) return tensor(src.marginal().mat(), src.marginal().mat());
  if (!src.ensemble() || src.ensemble()->block_len % 2 != 0) throw Error("exact fixed pairing needs an IID source or blocks of even length");
  const BlockEnsemble& ens = *src.ensemble();
  const int pairs_per_block = ens.block_len / 2;
  CMatrix out = CMatrix::Zero(16, 16);
  for (const auto& c : ens.components) {
    for (int j = 0; j < pairs_per_block; ++j) {
      const std::vector<SlotRef> slots = {{2 * j, kSideA}, {2 * j, kSideB}, {2 * j + 1, kSideA}, {2 * j + 1, kSideB}};
      out += (c.prob / pairs_per_block) * reduced_on_slots(c.factors, slots, src.run_dims());
    }
  }
  return out;
}

VerifierReport direct_concurrence_2copy(const SourceProcess& src, const DirectOptions& options) {
  if (src.run_dims() != Dims{2, 2}) throw Error("two-copy measurement needs qubit-pair runs");
  if (!options.exact && options.shots % 2 != 0) throw Error("odd shots: runs are measured in pairs");

  VerifierReport rep;
  rep.protocol = "direct";
  rep.threshold = 0.0;
  rep.exact = options.exact;
  rep.audit = options.audit();
  const bool both = options.compliant || options.sides == PairSides::both_with_correlations;

  if (options.exact) {
    const PairProbabilities fixed = pair_probabilities(exact_pair_state(src, Pairing::fixed_consecutive));
    const PairProbabilities random = pair_probabilities(exact_pair_state(src, Pairing::random));
    const PairProbabilities& used = options.compliant ? fixed : (options.pairing == Pairing::random ? random : fixed);
    const double p = options.compliant ? 0.5 * (fixed.anti_a + random.anti_a) : used.anti_a;
    rep.statistic = 2.0 * std::sqrt(std::max(p, 0.0));
    rep.se = 0.0;
    rep.diagnostics["P_a"] = p;
    if (both) {
      const double viol = std::max(fixed.anti_a + fixed.anti_b - 2.0 * fixed.anti_both, random.anti_a + random.anti_b - 2.0 * random.anti_both);
      rep.diagnostics["p_violation"] = viol;
      rep.diagnostics["P_b"] = options.compliant ? 0.5 * (fixed.anti_b + random.anti_b) : used.anti_b;
    }
    rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
    if (options.compliant && rep.verdict == Verdict::entangled) {
      const bool exchangeable = std::abs(fixed.anti_a - random.anti_a) <= kExactTol;
      const bool correlated = rep.diagnostics["p_violation"] <= kExactTol;
      TomographyOptions topt;
      topt.exact = true;
      const bool tomo = tomography_test(src, topt).report.verdict == Verdict::entangled;
      rep.diagnostics["exchangeable"] = exchangeable;
      rep.diagnostics["correlation_check"] = correlated;
      rep.diagnostics["tomography_confirms"] = tomo;
      if (!(exchangeable && correlated && tomo)) {
        rep.verdict = Verdict::inconclusive;
        rep.notes.push_back("compliant checks failed");
      }
    }
    return rep;
  }

  if (!options.compliant) {
    const int n = static_cast<int>(options.shots);
    if (n < 2) throw Error("two-copy measurement needs at least two shots");
    const RunSequence seq = src.sample_runs(n, derive_seed(options.seed, 1));
    const auto pairs = options.pairing == Pairing::random ? random_groups(n, 2, derive_seed(options.seed, 2)).groups : consecutive_pairs(0, n);
    const auto records = simulate_pairs(seq, pairs, both, derive_seed(options.seed, 3));
    const PairCounts c = count(records, 0, records.size());
    const double p = c.anti_a / c.n;
    const Estimate est = concurrence_from_pa(p, c.n);
    rep.statistic = est.value;
    rep.se = est.se;
    rep.shots = n;
    rep.diagnostics["P_a"] = p;
    rep.diagnostics["P_a_se"] = proportion_se(p, c.n);
    if (both) {
      rep.diagnostics["P_b"] = c.anti_b / c.n;
      rep.diagnostics["p_violation"] = c.violations / c.n;
    }
    rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
    return rep;
  }

  // Compliant pipeline. A separate stretch of runs goes to tomography.
  const long long n_tomo = std::max<long long>(900, options.shots / 5 / 9 * 9);
  const long long n_pairs_runs = (options.shots - n_tomo) / 4 * 4;
  if (n_pairs_runs < 8) throw Error("too few shots for the compliant two-copy pipeline");
  const int n2 = static_cast<int>(n_pairs_runs);
  const int half = n2 / 2;
  const RunSequence seq = src.sample_runs(n2, derive_seed(options.seed, 1));
  auto pairs = consecutive_pairs(0, half);
  std::vector<int> tail(static_cast<size_t>(n2 - half));
  for (int r = half; r < n2; ++r) tail[static_cast<size_t>(r - half)] = r;
  for (auto& g : random_groups(tail, 2, derive_seed(options.seed, 2)).groups) pairs.push_back(std::move(g));
  const std::size_t n_fixed = static_cast<std::size_t>(half / 2);
  const auto records = simulate_pairs(seq, pairs, true, derive_seed(options.seed, 3));

  const PairCounts all = count(records, 0, records.size());
  const PairCounts fixed = count(records, 0, n_fixed);
  const PairCounts random = count(records, n_fixed, records.size());
  const double p = all.anti_a / all.n;
  const Estimate est = concurrence_from_pa(p, all.n);
  rep.statistic = est.value;
  rep.se = est.se;
  rep.shots = options.shots;
  rep.diagnostics["P_a"] = p;
  rep.diagnostics["P_b"] = all.anti_b / all.n;

  // Identical pure copies are symmetric under swapping whole runs, so one side
  // antisymmetric forces the other.
  const double viol = all.violations / all.n;
  const bool correlated = viol <= kSigmaRule * std::sqrt(viol * (1.0 - viol) / all.n);
  rep.diagnostics["p_violation"] = viol;
  rep.diagnostics["correlation_check"] = correlated;

  const double pf = fixed.anti_a / fixed.n;
  const double pr = random.anti_a / random.n;
  const double se_f = proportion_se(pf, fixed.n);
  const double se_r = proportion_se(pr, random.n);
  const bool exchangeable = std::abs(pf - pr) <= kSigmaRule * std::sqrt(se_f * se_f + se_r * se_r);
  rep.diagnostics["P_a_fixed"] = pf;
  rep.diagnostics["P_a_random"] = pr;
  rep.diagnostics["exchangeable"] = exchangeable;

  const SubsampleEstimator estimator = [&](const std::vector<int>& kept, std::uint64_t) {
    std::vector<char> deleted(static_cast<size_t>(n2), 1);
    for (int r : kept) deleted[static_cast<size_t>(r)] = 0;
    const PairCounts c = count(records, 0, records.size(), &deleted);
    if (c.n < 1.0) return Estimate{std::nan(""), 0.0};
    return concurrence_from_pa(c.anti_a / c.n, c.n);
  };
  const StabilityResult stab = deletion_stability(estimator, est, n2, options.deletion_fraction, options.deletion_trials,
                                                  derive_seed(options.seed, 4), options.exec);
  rep.diagnostics["deletion_stable"] = stab.stable;
  rep.diagnostics["deletion_spread"] = stab.spread;

  TomographyOptions topt;
  topt.shots_per_setting = n_tomo / 9;
  topt.seed = derive_seed(options.seed, 5);
  topt.bootstrap = options.tomography_bootstrap;
  topt.exec = options.exec;
  const VerifierReport tomo = tomography_test(src, topt).report;
  const bool tomo_confirms = tomo.verdict == Verdict::entangled;
  rep.diagnostics["tomography_concurrence"] = tomo.statistic;
  rep.diagnostics["tomography_confirms"] = tomo_confirms;

  rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
  if (rep.verdict == Verdict::entangled) {
    if (!correlated) rep.notes.push_back("one side antisymmetric without the other: copies are not identical pure states");
    if (!exchangeable) rep.notes.push_back("fixed and random pairing disagree");
    if (!stab.stable) rep.notes.push_back("statistic unstable under deletion");
    if (!tomo_confirms) rep.notes.push_back("tomography does not confirm entanglement");
    if (!(correlated && exchangeable && stab.stable && tomo_confirms)) rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

}  // namespace entver
