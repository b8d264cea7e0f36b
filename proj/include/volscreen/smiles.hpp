#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "volscreen/molgraph.hpp"

namespace volscreen {

// Parses the supported SMILES subset: atoms C, O, F, c, o; branches ();
// ring-closure digits 0-9; explicit bonds -, = and #. A bond written between
// two aromatic atoms without a symbol is aromatic, otherwise single.
// Throws ChemError with kind UnsupportedToken, ValenceError, UnclosedRing or
// UnbalancedParenthesis.
MolGraph parse_smiles(std::string_view text);

// Canonical atom ranks by iterative neighborhood refinement; ranks are dense
// in [0, n) and invariant under atom-order permutation up to symmetry classes.
std::vector<int> canonical_ranks(const MolGraph& mol);

// Deterministic SMILES writer: traversal starts at the lowest-ranked atom and
// orders neighbors by (rank, index). parse_smiles(to_smiles(m)) is
// graph-isomorphic to m.
std::string to_smiles(const MolGraph& mol);

// SMILES line files: one molecule per line, '#' starts a comment, blank lines
// ignored.
std::vector<std::string> read_smiles_lines(const std::string& path);
void write_smiles_lines(const std::string& path, const std::vector<std::string>& smiles);

}  // namespace volscreen
