#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace volscreen {

enum class Element : std::uint8_t { C, O, F };
enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

const char* element_symbol(Element e);
int element_valence(Element e);   // C 4, O 2, F 1
double element_weight(Element e);  // C 12.011, O 15.999, F 18.998
inline constexpr double kHydrogenWeight = 1.008;

enum class ChemErrorKind {
  UnsupportedToken,
  ValenceError,
  UnclosedRing,
  UnbalancedParenthesis,
  NoHydrogenAtSite,
  InvalidGraph,  // programmatic misuse: self-loop, duplicate bond, disconnected
};

class ChemError : public std::runtime_error {
 public:
  ChemError(ChemErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ChemErrorKind kind() const { return kind_; }

 private:
  ChemErrorKind kind_;
};

struct Atom {
  Element element = Element::C;
  bool aromatic = false;
  bool ring_member = false;  // derived during finalize
};

struct Bond {
  int i = 0;
  int j = 0;
  BondOrder order = BondOrder::Single;
};

// Hydrogen-implicit molecular graph over C/O/F. Instances are produced by
// MolGraphBuilder (or the SMILES parser) and always satisfy the valence,
// connectivity and aromatic-ring invariants; treat them as immutable values.
class MolGraph {
 public:
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int b) const { return bonds_[static_cast<std::size_t>(b)]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  int implicit_h(int i) const { return implicit_h_[static_cast<std::size_t>(i)]; }
  int total_implicit_h() const;

  bool bond_in_ring(int b) const { return bond_in_ring_[static_cast<std::size_t>(b)]; }

  // Heavy-atom degree.
  int degree(int i) const { return static_cast<int>(neighbors_[static_cast<std::size_t>(i)].size()); }
  struct Neighbor {
    int atom;
    BondOrder order;
  };
  const std::vector<Neighbor>& neighbors(int i) const {
    return neighbors_[static_cast<std::size_t>(i)];
  }

  // Ring count as the cyclomatic number (bonds - atoms + 1 for a connected graph).
  int ring_count() const { return bond_count() - atom_count() + 1; }

 private:
  friend class MolGraphBuilder;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<int> implicit_h_;
  std::vector<bool> bond_in_ring_;
  std::vector<std::vector<Neighbor>> neighbors_;
};

// Collects atoms and bonds, then validates everything in build():
//  - no self-loops, no duplicate bonds, graph connected
//  - aromatic bonds only between aromatic atoms; every aromatic atom and
//    aromatic bond lies on a cycle in the aromatic subgraph
//  - valence: sum of bond orders plus implicit H equals the element valence.
//    An aromatic bond contributes 1.5 at carbon and 1 at oxygen (the oxygen
//    donates a lone pair instead of forming a pi bond); fractional halves at
//    ring-fusion carbons are floored away, they belong to the ring system.
class MolGraphBuilder {
 public:
  int add_atom(Element e, bool aromatic = false);
  void add_bond(int i, int j, BondOrder order);
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const std::vector<Bond>& bonds() const { return bonds_; }

  static MolGraphBuilder from(const MolGraph& g);

  MolGraph build() const;  // throws ChemError

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

}  // namespace volscreen
