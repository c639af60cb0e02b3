#include "entver/protocols/report.hpp"

#include <algorithm>
#include <cmath>

namespace entver {

void CriteriaAudit::violate(int criterion, std::string why) {
  switch (criterion) {
    case 1: c1 = false; break;
    case 2: c2 = false; break;
    case 3: c3 = false; break;
    case 4: c4 = false; break;
    case 5: c5 = false; break;
    default: return;
  }
  notes.push_back("c" + std::to_string(criterion) + ": " + std::move(why));
}

Verdict decide(double statistic, double threshold, double se, Direction dir) {
  if (!std::isfinite(statistic) || std::isnan(se)) return Verdict::inconclusive;
  const double margin = dir == Direction::above ? statistic - threshold : threshold - statistic;
  const double needed = std::max(kSigmaRule * se, kTieTolerance);
  return margin > needed ? Verdict::entangled : Verdict::inconclusive;
}

const char* to_string(Verdict v) { return v == Verdict::entangled ? "entangled" : "inconclusive"; }

}  // namespace entver
