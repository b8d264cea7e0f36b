#include "volscreen/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "volscreen/csv.hpp"

namespace volscreen {

namespace {

struct PendingRing {
  int atom;
  std::optional<BondOrder> order;
};

BondOrder default_bond(const MolGraphBuilder& b, int i, int j,
                       const std::vector<bool>& aromatic_flags) {
  (void)b;
  if (aromatic_flags[static_cast<std::size_t>(i)] && aromatic_flags[static_cast<std::size_t>(j)])
    return BondOrder::Aromatic;
  return BondOrder::Single;
}

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  MolGraphBuilder builder;
  std::vector<bool> aromatic_flags;

  int prev = -1;
  std::optional<BondOrder> pending;
  std::vector<int> branch_stack;
  std::map<char, PendingRing> open_rings;

  auto add_parsed_atom = [&](Element e, bool aromatic) {
    int idx = builder.add_atom(e, aromatic);
    aromatic_flags.push_back(aromatic);
    if (prev >= 0) {
      BondOrder order = pending ? *pending : default_bond(builder, prev, idx, aromatic_flags);
      builder.add_bond(prev, idx, order);
    } else if (pending) {
      throw ChemError(ChemErrorKind::UnsupportedToken, "bond symbol before first atom");
    }
    pending.reset();
    prev = idx;
  };

  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    char ch = text[pos];
    switch (ch) {
      case 'C': add_parsed_atom(Element::C, false); break;
      case 'O': add_parsed_atom(Element::O, false); break;
      case 'F': add_parsed_atom(Element::F, false); break;
      case 'c': add_parsed_atom(Element::C, true); break;
      case 'o': add_parsed_atom(Element::O, true); break;
      case '-': case '=': case '#': {
        if (pending)
          throw ChemError(ChemErrorKind::UnsupportedToken, "two consecutive bond symbols");
        pending = (ch == '-') ? BondOrder::Single
                              : (ch == '=') ? BondOrder::Double : BondOrder::Triple;
        break;
      }
      case '(': {
        if (prev < 0)
          throw ChemError(ChemErrorKind::UnbalancedParenthesis, "branch opened before any atom");
        if (pending)
          throw ChemError(ChemErrorKind::UnsupportedToken, "bond symbol before '('");
        branch_stack.push_back(prev);
        break;
      }
      case ')': {
        if (branch_stack.empty())
          throw ChemError(ChemErrorKind::UnbalancedParenthesis, "')' without matching '('");
        if (pending)
          throw ChemError(ChemErrorKind::UnsupportedToken, "dangling bond before ')'");
        prev = branch_stack.back();
        branch_stack.pop_back();
        break;
      }
      default: {
        if (ch >= '0' && ch <= '9') {
          if (prev < 0)
            throw ChemError(ChemErrorKind::UnclosedRing, "ring closure before any atom");
          auto it = open_rings.find(ch);
          if (it == open_rings.end()) {
            open_rings.insert_or_assign(ch, PendingRing{prev, pending});
            pending.reset();
          } else {
            PendingRing open = it->second;
            open_rings.erase(it);
            if (open.order && pending && *open.order != *pending)
              throw ChemError(ChemErrorKind::UnsupportedToken,
                              "conflicting bond orders on ring closure");
            BondOrder order = open.order ? *open.order
                              : pending ? *pending
                                        : default_bond(builder, open.atom, prev, aromatic_flags);
            if (open.atom == prev)
              throw ChemError(ChemErrorKind::UnclosedRing, "ring closure to the same atom");
            builder.add_bond(open.atom, prev, order);
            pending.reset();
          }
        } else {
          throw ChemError(ChemErrorKind::UnsupportedToken,
                          std::string("unsupported SMILES token '") + ch + "' at position " +
                              std::to_string(pos));
        }
      }
    }
  }

  if (!open_rings.empty())
    throw ChemError(ChemErrorKind::UnclosedRing, "unclosed ring bond at end of input");
  if (!branch_stack.empty())
    throw ChemError(ChemErrorKind::UnbalancedParenthesis, "unclosed '(' at end of input");
  if (pending)
    throw ChemError(ChemErrorKind::UnsupportedToken, "dangling bond at end of input");
  if (builder.atom_count() == 0)
    throw ChemError(ChemErrorKind::UnsupportedToken, "empty SMILES");

  return builder.build();
}

std::vector<int> canonical_ranks(const MolGraph& mol) {
  const int n = mol.atom_count();
  // Initial invariant: element, aromaticity, heavy degree, implicit H, ring flag.
  std::vector<std::vector<long>> keys(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    keys[static_cast<std::size_t>(i)] = {static_cast<long>(a.element), a.aromatic ? 1L : 0L,
                                         static_cast<long>(mol.degree(i)),
                                         static_cast<long>(mol.implicit_h(i)),
                                         a.ring_member ? 1L : 0L};
  }

  auto assign_ranks = [&](const std::vector<std::vector<long>>& ks) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return ks[static_cast<std::size_t>(a)] < ks[static_cast<std::size_t>(b)];
    });
    std::vector<int> ranks(static_cast<std::size_t>(n), 0);
    int r = 0;
    for (int idx = 0; idx < n; ++idx) {
      if (idx > 0 && ks[static_cast<std::size_t>(order[static_cast<std::size_t>(idx)])] !=
                         ks[static_cast<std::size_t>(order[static_cast<std::size_t>(idx - 1)])])
        ++r;
      ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(idx)])] = r;
    }
    return ranks;
  };

  std::vector<int> ranks = assign_ranks(keys);
  int distinct = 1 + *std::max_element(ranks.begin(), ranks.end());

  for (int iter = 0; iter < n; ++iter) {
    std::vector<std::vector<long>> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<long> sig{static_cast<long>(ranks[static_cast<std::size_t>(i)])};
      std::vector<std::pair<long, long>> nbrs;
      for (const auto& nb : mol.neighbors(i)) {
        nbrs.emplace_back(static_cast<long>(nb.order),
                          static_cast<long>(ranks[static_cast<std::size_t>(nb.atom)]));
      }
      std::sort(nbrs.begin(), nbrs.end());
      for (auto& [o, r] : nbrs) {
        sig.push_back(o);
        sig.push_back(r);
      }
      next[static_cast<std::size_t>(i)] = std::move(sig);
    }
    std::vector<int> new_ranks = assign_ranks(next);
    int new_distinct = 1 + *std::max_element(new_ranks.begin(), new_ranks.end());
    if (new_distinct == distinct && new_ranks == ranks) break;
    ranks = std::move(new_ranks);
    distinct = new_distinct;
    if (distinct == n) break;
  }
  return ranks;
}

namespace {

struct RingClosure {
  int opener;  // emitted first in output order
  int closer;
  BondOrder order;
  int digit = -1;
};

std::string bond_token(const MolGraph& mol, int i, int j, BondOrder order) {
  switch (order) {
    case BondOrder::Single:
      // Explicit '-' keeps a single bond between two aromatic atoms from
      // reading back as aromatic.
      if (mol.atom(i).aromatic && mol.atom(j).aromatic) return "-";
      return "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic: return "";
  }
  return "";
}

}  // namespace

std::string to_smiles(const MolGraph& mol) {
  const int n = mol.atom_count();
  std::vector<int> ranks = canonical_ranks(mol);

  int start = 0;
  for (int i = 1; i < n; ++i) {
    if (std::make_pair(ranks[static_cast<std::size_t>(i)], i) <
        std::make_pair(ranks[static_cast<std::size_t>(start)], start))
      start = i;
  }

  // DFS pass: tree structure, preorder, and ring-closure edges.
  std::vector<int> preorder(static_cast<std::size_t>(n), -1);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  std::vector<RingClosure> closures;

  auto ordered_neighbors = [&](int u) {
    std::vector<MolGraph::Neighbor> nbrs = mol.neighbors(u);
    std::sort(nbrs.begin(), nbrs.end(), [&](const auto& a, const auto& b) {
      return std::make_pair(ranks[static_cast<std::size_t>(a.atom)], a.atom) <
             std::make_pair(ranks[static_cast<std::size_t>(b.atom)], b.atom);
    });
    return nbrs;
  };

  int counter = 0;
  std::vector<std::pair<int, std::size_t>> stack;  // (atom, next neighbor slot)
  std::vector<std::vector<MolGraph::Neighbor>> nbr_cache(static_cast<std::size_t>(n));
  preorder[static_cast<std::size_t>(start)] = counter++;
  nbr_cache[static_cast<std::size_t>(start)] = ordered_neighbors(start);
  stack.emplace_back(start, 0);
  std::vector<std::pair<int, int>> seen_closure_pairs;
  while (!stack.empty()) {
    auto& [u, slot] = stack.back();
    const auto& nbrs = nbr_cache[static_cast<std::size_t>(u)];
    if (slot >= nbrs.size()) {
      stack.pop_back();
      continue;
    }
    const auto nb = nbrs[slot++];
    if (nb.atom == parent[static_cast<std::size_t>(u)] &&
        preorder[static_cast<std::size_t>(nb.atom)] >= 0) {
      // Tree edge back to parent; skip exactly one occurrence (no parallel
      // bonds exist, so this is safe).
      continue;
    }
    if (preorder[static_cast<std::size_t>(nb.atom)] < 0) {
      parent[static_cast<std::size_t>(nb.atom)] = u;
      preorder[static_cast<std::size_t>(nb.atom)] = counter++;
      children[static_cast<std::size_t>(u)].push_back(nb.atom);
      nbr_cache[static_cast<std::size_t>(nb.atom)] = ordered_neighbors(nb.atom);
      stack.emplace_back(nb.atom, 0);
    } else {
      auto key = std::minmax(u, nb.atom);
      std::pair<int, int> kp{key.first, key.second};
      if (std::find(seen_closure_pairs.begin(), seen_closure_pairs.end(), kp) ==
          seen_closure_pairs.end()) {
        seen_closure_pairs.push_back(kp);
        RingClosure rc;
        rc.order = nb.order;
        if (preorder[static_cast<std::size_t>(u)] < preorder[static_cast<std::size_t>(nb.atom)]) {
          rc.opener = u;
          rc.closer = nb.atom;
        } else {
          rc.opener = nb.atom;
          rc.closer = u;
        }
        closures.push_back(rc);
      }
    }
  }

  // Assign ring digits in preorder, reusing digits once closed.
  {
    std::vector<int> order_idx(closures.size());
    for (std::size_t i = 0; i < order_idx.size(); ++i) order_idx[i] = static_cast<int>(i);
    std::sort(order_idx.begin(), order_idx.end(), [&](int a, int b) {
      return preorder[static_cast<std::size_t>(closures[static_cast<std::size_t>(a)].opener)] <
             preorder[static_cast<std::size_t>(closures[static_cast<std::size_t>(b)].opener)];
    });
    std::vector<bool> busy(10, false);
    // Events in preorder: at each atom close finished digits, then open new.
    std::vector<std::vector<int>> opens_at(static_cast<std::size_t>(n)), closes_at(static_cast<std::size_t>(n));
    for (int ci : order_idx)
      opens_at[static_cast<std::size_t>(closures[static_cast<std::size_t>(ci)].opener)].push_back(ci);
    for (std::size_t ci = 0; ci < closures.size(); ++ci)
      closes_at[static_cast<std::size_t>(closures[ci].closer)].push_back(static_cast<int>(ci));
    std::vector<int> atoms_by_preorder(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) atoms_by_preorder[static_cast<std::size_t>(preorder[static_cast<std::size_t>(i)])] = i;
    for (int p = 0; p < n; ++p) {
      int u = atoms_by_preorder[static_cast<std::size_t>(p)];
      for (int ci : closes_at[static_cast<std::size_t>(u)])
        busy[static_cast<std::size_t>(closures[static_cast<std::size_t>(ci)].digit)] = false;
      for (int ci : opens_at[static_cast<std::size_t>(u)]) {
        int d = -1;
        for (int cand = 1; cand <= 10; ++cand) {
          int dd = cand % 10;  // 1..9 then 0
          if (!busy[static_cast<std::size_t>(dd)]) { d = dd; break; }
        }
        if (d < 0)
          throw ChemError(ChemErrorKind::InvalidGraph, "more than 10 concurrently open rings");
        closures[static_cast<std::size_t>(ci)].digit = d;
        busy[static_cast<std::size_t>(d)] = true;
      }
    }
  }

  std::vector<std::vector<int>> ring_tokens(static_cast<std::size_t>(n));
  for (std::size_t ci = 0; ci < closures.size(); ++ci) {
    ring_tokens[static_cast<std::size_t>(closures[ci].opener)].push_back(static_cast<int>(ci));
    ring_tokens[static_cast<std::size_t>(closures[ci].closer)].push_back(static_cast<int>(ci));
  }

  std::string out;
  // Emit with an explicit stack mirroring the recursive grammar.
  struct EmitFrame {
    int atom;
    std::size_t next_child = 0;
  };
  std::vector<EmitFrame> estack;

  auto emit_atom = [&](int u) {
    const Atom& a = mol.atom(u);
    std::string sym = element_symbol(a.element);
    if (a.aromatic) sym[0] = static_cast<char>(std::tolower(sym[0]));
    out += sym;
    // Closures sorted by digit for a stable layout; bond token only on the
    // opening side.
    std::vector<int> toks = ring_tokens[static_cast<std::size_t>(u)];
    std::stable_sort(toks.begin(), toks.end(), [&](int x, int y) {
      const auto& cx = closures[static_cast<std::size_t>(x)];
      const auto& cy = closures[static_cast<std::size_t>(y)];
      bool x_closes = cx.closer == u;
      bool y_closes = cy.closer == u;
      if (x_closes != y_closes) return x_closes;
      return cx.digit < cy.digit;
    });
    for (int ci : toks) {
      const RingClosure& rc = closures[static_cast<std::size_t>(ci)];
      if (rc.opener == u) out += bond_token(mol, rc.opener, rc.closer, rc.order);
      out += static_cast<char>('0' + rc.digit);
    }
  };

  emit_atom(start);
  estack.push_back({start, 0});
  while (!estack.empty()) {
    EmitFrame& f = estack.back();
    const auto& kids = children[static_cast<std::size_t>(f.atom)];
    if (f.next_child >= kids.size()) {
      estack.pop_back();
      if (!estack.empty()) {
        EmitFrame& pf = estack.back();
        const auto& pkids = children[static_cast<std::size_t>(pf.atom)];
        if (pf.next_child < pkids.size()) out += ')';
      }
      continue;
    }
    bool last = (f.next_child + 1 == kids.size());
    int child = kids[f.next_child++];
    if (!last) out += '(';
    out += bond_token(mol, f.atom, child, [&] {
      for (const auto& nb : mol.neighbors(f.atom))
        if (nb.atom == child) return nb.order;
      return BondOrder::Single;
    }());
    emit_atom(child);
    estack.push_back({child, 0});
  }

  return out;
}

std::vector<std::string> read_smiles_lines(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // Trim surrounding whitespace.
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

void write_smiles_lines(const std::string& path, const std::vector<std::string>& smiles) {
  std::string text;
  for (const auto& s : smiles) {
    text += s;
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace volscreen
