#include "volscreen/molgraph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace volscreen {

const char* element_symbol(Element e) {
  switch (e) {
    case Element::C: return "C";
    case Element::O: return "O";
    case Element::F: return "F";
  }
  return "?";
}

int element_valence(Element e) {
  switch (e) {
    case Element::C: return 4;
    case Element::O: return 2;
    case Element::F: return 1;
  }
  return 0;
}

double element_weight(Element e) {
  switch (e) {
    case Element::C: return 12.011;
    case Element::O: return 15.999;
    case Element::F: return 18.998;
  }
  return 0.0;
}

int MolGraph::total_implicit_h() const {
  return std::accumulate(implicit_h_.begin(), implicit_h_.end(), 0);
}

int MolGraphBuilder::add_atom(Element e, bool aromatic) {
  atoms_.push_back(Atom{e, aromatic, false});
  return static_cast<int>(atoms_.size()) - 1;
}

void MolGraphBuilder::add_bond(int i, int j, BondOrder order) {
  bonds_.push_back(Bond{i, j, order});
}

MolGraphBuilder MolGraphBuilder::from(const MolGraph& g) {
  MolGraphBuilder b;
  b.atoms_ = g.atoms();
  for (auto& a : b.atoms_) a.ring_member = false;
  b.bonds_ = g.bonds();
  return b;
}

namespace {

// Tarjan bridge finding; a bond is in a ring iff it is not a bridge.
std::vector<bool> find_ring_bonds(int n, const std::vector<Bond>& bonds,
                                  const std::vector<std::vector<std::pair<int, int>>>& adj) {
  std::vector<bool> in_ring(bonds.size(), true);
  std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  int timer = 0;
  // Iterative DFS to keep deep chains off the call stack.
  struct Frame {
    int node;
    int parent_bond;
    std::size_t next_edge;
  };
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] != -1) continue;
    stack.push_back({root, -1, 0});
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      auto u = static_cast<std::size_t>(f.node);
      if (f.next_edge < adj[u].size()) {
        auto [v, bidx] = adj[u][f.next_edge++];
        if (bidx == f.parent_bond) continue;
        auto vi = static_cast<std::size_t>(v);
        if (disc[vi] == -1) {
          disc[vi] = low[vi] = timer++;
          stack.push_back({v, bidx, 0});
        } else {
          low[u] = std::min(low[u], disc[vi]);
        }
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          auto p = static_cast<std::size_t>(stack.back().node);
          low[p] = std::min(low[p], low[u]);
          if (low[u] > disc[p]) in_ring[static_cast<std::size_t>(f.parent_bond)] = false;
        }
      }
    }
  }
  return in_ring;
}

}  // namespace

MolGraph MolGraphBuilder::build() const {
  const int n = static_cast<int>(atoms_.size());
  if (n == 0) throw ChemError(ChemErrorKind::InvalidGraph, "empty molecule");

  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    const Bond& bd = bonds_[b];
    if (bd.i < 0 || bd.i >= n || bd.j < 0 || bd.j >= n)
      throw ChemError(ChemErrorKind::InvalidGraph, "bond references missing atom");
    if (bd.i == bd.j)
      throw ChemError(ChemErrorKind::InvalidGraph, "self-loop bond");
    adj[static_cast<std::size_t>(bd.i)].emplace_back(bd.j, static_cast<int>(b));
    adj[static_cast<std::size_t>(bd.j)].emplace_back(bd.i, static_cast<int>(b));
  }
  for (int i = 0; i < n; ++i) {
    auto& nbrs = adj[static_cast<std::size_t>(i)];
    std::vector<int> seen;
    for (auto& [v, b] : nbrs) {
      if (std::find(seen.begin(), seen.end(), v) != seen.end())
        throw ChemError(ChemErrorKind::InvalidGraph, "duplicate bond between atom pair");
      seen.push_back(v);
    }
  }

  // Connectivity.
  {
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::vector<int> queue{0};
    visited[0] = true;
    while (!queue.empty()) {
      int u = queue.back();
      queue.pop_back();
      for (auto& [v, b] : adj[static_cast<std::size_t>(u)]) {
        if (!visited[static_cast<std::size_t>(v)]) {
          visited[static_cast<std::size_t>(v)] = true;
          queue.push_back(v);
        }
      }
    }
    if (std::find(visited.begin(), visited.end(), false) != visited.end())
      throw ChemError(ChemErrorKind::InvalidGraph, "molecule graph is disconnected");
  }

  std::vector<bool> ring_bond = find_ring_bonds(n, bonds_, adj);

  // Aromatic subgraph validation: aromatic bonds join two aromatic atoms, and
  // every aromatic bond must sit on a cycle made of aromatic bonds.
  {
    std::vector<Bond> arom_bonds;
    std::vector<int> arom_bond_index;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      if (bonds_[b].order == BondOrder::Aromatic) {
        const Bond& bd = bonds_[b];
        if (!atoms_[static_cast<std::size_t>(bd.i)].aromatic ||
            !atoms_[static_cast<std::size_t>(bd.j)].aromatic)
          throw ChemError(ChemErrorKind::ValenceError,
                          "aromatic bond attached to a non-aromatic atom");
        arom_bonds.push_back(bd);
        arom_bond_index.push_back(static_cast<int>(b));
      }
    }
    std::vector<std::vector<std::pair<int, int>>> arom_adj(static_cast<std::size_t>(n));
    for (std::size_t b = 0; b < arom_bonds.size(); ++b) {
      arom_adj[static_cast<std::size_t>(arom_bonds[b].i)].emplace_back(arom_bonds[b].j,
                                                                       static_cast<int>(b));
      arom_adj[static_cast<std::size_t>(arom_bonds[b].j)].emplace_back(arom_bonds[b].i,
                                                                       static_cast<int>(b));
    }
    std::vector<bool> arom_in_ring = find_ring_bonds(n, arom_bonds, arom_adj);
    for (std::size_t b = 0; b < arom_bonds.size(); ++b) {
      if (!arom_in_ring[b])
        throw ChemError(ChemErrorKind::ValenceError,
                        "aromatic bond is not part of a closed aromatic ring");
    }
    for (int i = 0; i < n; ++i) {
      if (atoms_[static_cast<std::size_t>(i)].aromatic &&
          arom_adj[static_cast<std::size_t>(i)].empty())
        throw ChemError(ChemErrorKind::ValenceError,
                        "aromatic atom has no aromatic bonds");
    }
  }

  MolGraph g;
  g.atoms_ = atoms_;
  g.bonds_ = bonds_;
  g.neighbors_.assign(static_cast<std::size_t>(n), {});
  for (const Bond& bd : bonds_) {
    g.neighbors_[static_cast<std::size_t>(bd.i)].push_back({bd.j, bd.order});
    g.neighbors_[static_cast<std::size_t>(bd.j)].push_back({bd.i, bd.order});
  }
  g.bond_in_ring_ = ring_bond;
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    if (ring_bond[b]) {
      g.atoms_[static_cast<std::size_t>(bonds_[b].i)].ring_member = true;
      g.atoms_[static_cast<std::size_t>(bonds_[b].j)].ring_member = true;
    }
  }

  // Implicit hydrogens fill the valence exactly.
  g.implicit_h_.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const Atom& a = g.atoms_[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (const auto& nb : g.neighbors_[static_cast<std::size_t>(i)]) {
      if (nb.order == BondOrder::Aromatic) {
        sum += (a.element == Element::O) ? 1.0 : 1.5;
      } else {
        sum += static_cast<double>(static_cast<int>(nb.order));
      }
    }
    int used = static_cast<int>(std::floor(sum + 0.1));
    int h = element_valence(a.element) - used;
    if (h < 0) {
      throw ChemError(ChemErrorKind::ValenceError,
                      std::string("valence exceeded at atom ") + std::to_string(i) + " (" +
                          element_symbol(a.element) + ")");
    }
    g.implicit_h_[static_cast<std::size_t>(i)] = h;
  }
  return g;
}

}  // namespace volscreen
