#include "entver/protocols/ensembles.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace entver {

void TestEnsemble::validate() const {
  if (states.empty()) throw Error("ensemble empty");
  if (probs.size() != states.size() || labels.size() != states.size()) throw Error("ensemble fields differ in length");
  double total = 0.0;
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != 2) throw Error("ensemble states must be qubits");
    if (std::abs(states[i].norm() - 1.0) > 1e-10) throw Error("ensemble state not normalized");
    if (!(probs[i] >= 0.0)) throw Error("negative ensemble probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("ensemble probabilities must sum to 1");
}

namespace ensembles {

namespace {

struct Labelled {
  const char* label;
  double x, y, z;
};

constexpr Labelled kMub[6] = {{"0", 0, 0, 1},  {"1", 0, 0, -1}, {"+x", 1, 0, 0},
                              {"-x", -1, 0, 0}, {"+y", 0, 1, 0}, {"-y", 0, -1, 0}};

int mub_index(const std::string& label) {
  for (int k = 0; k < 6; ++k) {
    if (label == kMub[k].label) return k;
  }
  throw Error("unknown MUB label '" + label + "' (expected 0, 1, +x, -x, +y, -y)");
}

}  // namespace

TestEnsemble tetrahedral() {
  const double s = 1.0 / std::sqrt(3.0);
  const double v[4][3] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  TestEnsemble e{"T", {}, {}, {}};
  for (int k = 0; k < 4; ++k) {
    e.labels.push_back("t" + std::to_string(k));
    e.states.push_back(bloch_ket(v[k][0], v[k][1], v[k][2]));
    e.probs.push_back(0.25);
  }
  return e;
}

TestEnsemble mub6() {
  TestEnsemble e = mub_subset({"0", "1", "+x", "-x", "+y", "-y"});
  e.name = "M";
  return e;
}

TestEnsemble mub_subset(const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error("ensemble empty");
  TestEnsemble e{"subset:", {}, {}, {}};
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto& m = kMub[mub_index(labels[i])];
    for (const auto& l : e.labels) {
      if (l == labels[i]) throw Error("duplicate ensemble label '" + l + "'");
    }
    e.name += (i ? "," : "") + labels[i];
    e.labels.push_back(labels[i]);
    e.states.push_back(bloch_ket(m.x, m.y, m.z));
    e.probs.push_back(1.0 / static_cast<double>(labels.size()));
  }
  return e;
}

std::vector<TestEnsemble> mub_four_subsets() {
  std::vector<TestEnsemble> out;
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      for (int c = b + 1; c < 6; ++c) {
        for (int d = c + 1; d < 6; ++d) out.push_back(mub_subset({kMub[a].label, kMub[b].label, kMub[c].label, kMub[d].label}));
      }
    }
  }
  return out;
}

TestEnsemble parse(const std::string& spec) {
  if (spec == "T") return tetrahedral();
  if (spec == "M") return mub6();
  const std::string prefix = "subset:";
  if (spec.rfind(prefix, 0) == 0) {
    std::vector<std::string> labels;
    std::stringstream ss(spec.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) labels.push_back(item);
    }
    return mub_subset(labels);
  }
  throw Error("unknown ensemble '" + spec + "' (expected T, M or subset:<labels>)");
}

}  // namespace ensembles

}  // namespace entver
