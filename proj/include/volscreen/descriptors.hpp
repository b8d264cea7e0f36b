#pragma once

#include <string>
#include <vector>

#include "volscreen/molgraph.hpp"

namespace volscreen {

struct Composition {
  int c = 0;
  int h = 0;
  int o = 0;
  int f = 0;

  enum class Category { HC, HCO, HCF, CF, HCOF, Other };
  Category category() const;
};

const char* category_name(Composition::Category c);

Composition composition(const MolGraph& mol);

// Sum of atomic weights including implicit hydrogens, in amu.
double mol_weight(const MolGraph& mol);

// Fixed-order static descriptor vector; names() and values() stay aligned.
//   MW, nC, nH, nO, nF, HeavyAtoms, RingCount, AromaticAtoms,
//   BranchingIndex, LongestChain, HBondDonors, RotatableBonds
const std::vector<std::string>& static_descriptor_names();
std::vector<double> static_descriptors(const MolGraph& mol);

// Longest simple path in the heavy-atom graph, counted in atoms. Exact
// backtracking search with a step budget; molecular graphs at this scale are
// nearly trees so the budget is never reached in practice.
int longest_chain(const MolGraph& mol);

}  // namespace volscreen
