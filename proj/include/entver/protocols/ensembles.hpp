#pragma once

#include <string>
#include <vector>

#include "entver/qmat.hpp"

namespace entver {

/// Qubit input states for teleportation tests with their probabilities.
struct TestEnsemble {
  std::string name;
  std::vector<std::string> labels;
  std::vector<CVector> states;
  std::vector<double> probs;

  void validate() const;
  int size() const { return static_cast<int>(states.size()); }
};

namespace ensembles {

/// Four states with tetrahedral Bloch vectors, p = 1/4.
TestEnsemble tetrahedral();
/// The six eigenstates of X, Y, Z, p = 1/6. Labels 0, 1, +x, -x, +y, -y.
TestEnsemble mub6();
/// Equal-weight subset of the six MUB states, by label.
TestEnsemble mub_subset(const std::vector<std::string>& labels);
/// All fifteen four-element subsets of the MUB states, in lexicographic label-index order.
std::vector<TestEnsemble> mub_four_subsets();
/// "T", "M" or "subset:<label>,<label>,...".
TestEnsemble parse(const std::string& spec);

}  // namespace ensembles

}  // namespace entver
