#pragma once

#include <map>
#include <string>
#include <vector>

namespace entver {

enum class Verdict { entangled, inconclusive };

/// One flag per verification criterion; true means the criterion is respected.
///  c1: no assumption about the form of the state
///  c2: no symmetry assumption
///  c3: no unverified IID assumption
///  c4: verification independent of the generation procedure
///  c5: postselection only through local filtering
struct CriteriaAudit {
  bool c1 = true;
  bool c2 = true;
  bool c3 = true;
  bool c4 = true;
  bool c5 = true;
  std::vector<std::string> notes;

  bool all_respected() const { return c1 && c2 && c3 && c4 && c5; }
  int violations() const { return !c1 + !c2 + !c3 + !c4 + !c5; }
  void violate(int criterion, std::string why);
};

struct VerifierReport {
  std::string protocol;
  Verdict verdict = Verdict::inconclusive;
  double statistic = 0.0;
  double threshold = 0.0;
  long long shots = 0;
  double se = 0.0;  // standard error of the statistic
  bool exact = false;
  CriteriaAudit audit;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

/// Which side of the threshold counts as evidence of entanglement.
enum class Direction { above, below };

inline constexpr double kSigmaRule = 3.0;
inline constexpr double kTieTolerance = 1e-10;

/// Entangled iff the statistic lies beyond the threshold on the violating side
/// by more than max(kSigmaRule * se, kTieTolerance). A tie is inconclusive.
Verdict decide(double statistic, double threshold, double se, Direction dir);

const char* to_string(Verdict v);

}  // namespace entver
