#include "entver/protocols/threshold.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "entver/random.hpp"

namespace entver {

namespace {

constexpr double kNotAPovm = -std::numeric_limits<double>::infinity();

struct Strategy {
  std::vector<double> params;  // 4 reals per outcome: Re/Im of a 2-vector
  std::vector<CMatrix> povm;
  std::vector<CVector> resend;
};

/// E_k = S^{-1/2} v_k v_k^dagger S^{-1/2} with S = sum_k v_k v_k^dagger.
bool povm_from_params(const std::vector<double>& x, int outcomes, std::vector<CMatrix>& out) {
  std::vector<CVector> v(static_cast<size_t>(outcomes), CVector(2));
  CMatrix s = CMatrix::Zero(2, 2);
  for (int k = 0; k < outcomes; ++k) {
    const double* p = &x[static_cast<size_t>(4 * k)];
    v[static_cast<size_t>(k)] << cplx(p[0], p[1]), cplx(p[2], p[3]);
    s += v[static_cast<size_t>(k)] * v[static_cast<size_t>(k)].adjoint();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  if (es.eigenvalues()(0) < 1e-10 * std::max(1.0, es.eigenvalues()(1))) return false;
  const CMatrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() *
                           es.eigenvectors().adjoint();
  out.resize(static_cast<size_t>(outcomes));
  for (int k = 0; k < outcomes; ++k) {
    const CVector w = inv_sqrt * v[static_cast<size_t>(k)];
    out[static_cast<size_t>(k)] = w * w.adjoint();
  }
  return true;
}

/// For fixed resend states the fidelity is sum_k Tr(E_k Q_k).
std::vector<CMatrix> resend_weights(const TestEnsemble& e, const std::vector<CVector>& resend) {
  std::vector<CMatrix> q;
  for (const auto& phi : resend) {
    CMatrix m = CMatrix::Zero(2, 2);
    for (int i = 0; i < e.size(); ++i) {
      const auto& psi = e.states[static_cast<size_t>(i)];
      m += e.probs[static_cast<size_t>(i)] * std::norm(phi.dot(psi)) * psi * psi.adjoint();
    }
    q.push_back(m);
  }
  return q;
}

double objective(const std::vector<double>& x, int outcomes, const std::vector<CMatrix>& q, std::vector<CMatrix>& scratch) {
  if (!povm_from_params(x, outcomes, scratch)) return kNotAPovm;
  double f = 0.0;
  for (int k = 0; k < outcomes; ++k) f += (scratch[static_cast<size_t>(k)] * q[static_cast<size_t>(k)]).trace().real();
  return f;
}

/// Optimal resend state per outcome: top eigenvector of the outcome-weighted input average.
std::vector<CVector> best_resend(const TestEnsemble& e, const std::vector<CMatrix>& povm, const std::vector<CVector>& previous) {
  std::vector<CVector> out;
  for (size_t k = 0; k < povm.size(); ++k) {
    CMatrix m = CMatrix::Zero(2, 2);
    for (int i = 0; i < e.size(); ++i) {
      const auto& psi = e.states[static_cast<size_t>(i)];
      m += e.probs[static_cast<size_t>(i)] * psi.dot(povm[k] * psi).real() * psi * psi.adjoint();
    }
    if (m.cwiseAbs().maxCoeff() < 1e-15 && k < previous.size()) {
      out.push_back(previous[k]);
      continue;
    }
    out.push_back(eigh(m).vectors.col(0));
  }
  return out;
}

/// Coordinate pattern search; only improving moves are accepted.
double pattern_search(std::vector<double>& x, int outcomes, const std::vector<CMatrix>& q) {
  std::vector<CMatrix> scratch;
  double best = objective(x, outcomes, q, scratch);
  double h = 0.1;
  int sweeps = 0;
  while (h > 1e-9 && sweeps < 400) {
    ++sweeps;
    bool improved = false;
    for (size_t j = 0; j < x.size(); ++j) {
      for (double dir : {1.0, -1.0}) {
        const double saved = x[j];
        x[j] = saved + dir * h;
        const double f = objective(x, outcomes, q, scratch);
        if (f > best + 1e-15) {
          best = f;
          improved = true;
          break;
        }
        x[j] = saved;
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace

double measure_prepare_fidelity(const TestEnsemble& e, const std::vector<CMatrix>& povm, const std::vector<CVector>& resend) {
  if (povm.size() != resend.size()) throw Error("one resend state per POVM outcome");
  double f = 0.0;
  for (int i = 0; i < e.size(); ++i) {
    const auto& psi = e.states[static_cast<size_t>(i)];
    for (size_t k = 0; k < povm.size(); ++k) {
      f += e.probs[static_cast<size_t>(i)] * psi.dot(povm[k] * psi).real() * std::norm(resend[k].dot(psi));
    }
  }
  return f;
}

ThresholdResult classical_threshold(const TestEnsemble& ensemble, const ThresholdOptions& options) {
  ensemble.validate();
  if (options.restarts < 1 || options.max_iter < 1 || options.outcomes < 1) throw Error("invalid threshold options");

  ThresholdResult best;
  {
    CMatrix avg = CMatrix::Zero(2, 2);
    for (int i = 0; i < ensemble.size(); ++i) {
      const auto& psi = ensemble.states[static_cast<size_t>(i)];
      avg += ensemble.probs[static_cast<size_t>(i)] * psi * psi.adjoint();
    }
    const EigenSystem es = eigh(avg);
    best.baseline = es.values(0);
    best.f_tilde = best.baseline;
    best.povm = {CMatrix::Identity(2, 2)};
    best.resend = {es.vectors.col(0)};
    best.converged = true;
  }

  const int k_out = options.outcomes;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = substream(options.seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> n01(0.0, 1.0);
    Strategy s;
    s.params.resize(static_cast<size_t>(4 * k_out));
    do {
      for (auto& p : s.params) p = n01(rng);
    } while (!povm_from_params(s.params, k_out, s.povm));
    s.resend.assign(static_cast<size_t>(k_out), CVector::Zero(2));

    std::vector<double> trace;
    double f = -1.0;
    bool converged = false;
    int it = 0;
    for (; it < options.max_iter; ++it) {
      s.resend = best_resend(ensemble, s.povm, s.resend);
      const auto q = resend_weights(ensemble, s.resend);
      const double f_new = pattern_search(s.params, k_out, q);
      povm_from_params(s.params, k_out, s.povm);
      trace.push_back(f_new);
      if (f_new - f < options.tol) {
        converged = true;
        f = std::max(f, f_new);
        ++it;
        break;
      }
      f = f_new;
    }
    // The resend step is optimal for the final POVM, so this can only help.
    s.resend = best_resend(ensemble, s.povm, s.resend);
    const double final_f = measure_prepare_fidelity(ensemble, s.povm, s.resend);
    if (final_f > trace.back()) trace.push_back(final_f);
    if (final_f > best.f_tilde) {
      best.f_tilde = final_f;
      best.iterations = it;
      best.converged = converged;
      best.povm = s.povm;
      best.resend = s.resend;
      best.trace = trace;
    }
  }
  return best;
}

const ThresholdResult& cached_threshold(const TestEnsemble& ensemble) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<ThresholdResult>> cache;
  std::string key = ensemble.name;
  for (size_t i = 0; i < ensemble.states.size(); ++i) key += "|" + ensemble.labels[i] + ":" + std::to_string(ensemble.probs[i]);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<ThresholdResult>(classical_threshold(ensemble))).first;
  return *it->second;
}

}  // namespace entver
