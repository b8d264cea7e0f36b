#include "volscreen/descriptors.hpp"

#include <algorithm>

namespace volscreen {

Composition::Category Composition::category() const {
  const bool has_h = h > 0, has_c = c > 0, has_o = o > 0, has_f = f > 0;
  if (has_h && has_c && !has_o && !has_f) return Category::HC;
  if (has_h && has_c && has_o && !has_f) return Category::HCO;
  if (has_h && has_c && !has_o && has_f) return Category::HCF;
  if (!has_h && has_c && !has_o && has_f) return Category::CF;
  if (has_h && has_c && has_o && has_f) return Category::HCOF;
  return Category::Other;
}

const char* category_name(Composition::Category c) {
  switch (c) {
    case Composition::Category::HC: return "H/C";
    case Composition::Category::HCO: return "H/C/O";
    case Composition::Category::HCF: return "H/C/F";
    case Composition::Category::CF: return "C/F";
    case Composition::Category::HCOF: return "H/C/O/F";
    case Composition::Category::Other: return "other";
  }
  return "other";
}

Composition composition(const MolGraph& mol) {
  Composition comp;
  for (int i = 0; i < mol.atom_count(); ++i) {
    switch (mol.atom(i).element) {
      case Element::C: ++comp.c; break;
      case Element::O: ++comp.o; break;
      case Element::F: ++comp.f; break;
    }
    comp.h += mol.implicit_h(i);
  }
  return comp;
}

double mol_weight(const MolGraph& mol) {
  double w = 0.0;
  for (int i = 0; i < mol.atom_count(); ++i) {
    w += element_weight(mol.atom(i).element);
    w += kHydrogenWeight * mol.implicit_h(i);
  }
  return w;
}

int longest_chain(const MolGraph& mol) {
  const int n = mol.atom_count();
  int best = 1;
  long budget = 4'000'000;
  std::vector<bool> visited(static_cast<std::size_t>(n), false);

  struct Frame {
    int atom;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;

  for (int start = 0; start < n && budget > 0; ++start) {
    stack.clear();
    stack.push_back({start, 0});
    visited[static_cast<std::size_t>(start)] = true;
    while (!stack.empty() && budget > 0) {
      Frame& f = stack.back();
      const auto& nbrs = mol.neighbors(f.atom);
      if (f.next >= nbrs.size()) {
        visited[static_cast<std::size_t>(f.atom)] = false;
        stack.pop_back();
        continue;
      }
      int v = nbrs[f.next++].atom;
      if (visited[static_cast<std::size_t>(v)]) continue;
      --budget;
      visited[static_cast<std::size_t>(v)] = true;
      stack.push_back({v, 0});
      best = std::max(best, static_cast<int>(stack.size()));
    }
    for (auto& fr : stack) visited[static_cast<std::size_t>(fr.atom)] = false;
    visited[static_cast<std::size_t>(start)] = false;
  }
  return best;
}

const std::vector<std::string>& static_descriptor_names() {
  static const std::vector<std::string> names = {
      "MW",           "nC",           "nH",          "nO",
      "nF",           "HeavyAtoms",   "RingCount",   "AromaticAtoms",
      "BranchingIndex", "LongestChain", "HBondDonors", "RotatableBonds"};
  return names;
}

std::vector<double> static_descriptors(const MolGraph& mol) {
  Composition comp = composition(mol);
  int aromatic = 0, branching = 0, donors = 0, rotatable = 0;
  for (int i = 0; i < mol.atom_count(); ++i) {
    if (mol.atom(i).aromatic) ++aromatic;
    if (mol.degree(i) >= 3) ++branching;
    if (mol.atom(i).element == Element::O && mol.implicit_h(i) >= 1) ++donors;
  }
  for (int b = 0; b < mol.bond_count(); ++b) {
    const Bond& bd = mol.bond(b);
    if (bd.order == BondOrder::Single && !mol.bond_in_ring(b) && mol.degree(bd.i) >= 2 &&
        mol.degree(bd.j) >= 2)
      ++rotatable;
  }
  return {mol_weight(mol),
          static_cast<double>(comp.c),
          static_cast<double>(comp.h),
          static_cast<double>(comp.o),
          static_cast<double>(comp.f),
          static_cast<double>(mol.atom_count()),
          static_cast<double>(mol.ring_count()),
          static_cast<double>(aromatic),
          static_cast<double>(branching),
          static_cast<double>(longest_chain(mol)),
          static_cast<double>(donors),
          static_cast<double>(rotatable)};
}

}  // namespace volscreen
