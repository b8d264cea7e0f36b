#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "support/chem_testutil.hpp"
#include "volscreen/descriptors.hpp"
#include "volscreen/fingerprint.hpp"
#include "volscreen/molgraph.hpp"
#include "volscreen/rng.hpp"
#include "volscreen/smiles.hpp"

using namespace volscreen;

namespace {

ChemErrorKind parse_error_kind(const std::string& smiles) {
  try {
    parse_smiles(smiles);
  } catch (const ChemError& e) {
    return e.kind();
  }
  FAIL("expected a parse error for: ", smiles);
  return ChemErrorKind::InvalidGraph;
}

}  // namespace

TEST_CASE("parse_smiles cyclopentane") {
  MolGraph m = parse_smiles("C1CCCC1");
  CHECK(m.atom_count() == 5);
  CHECK(m.bond_count() == 5);
  CHECK(m.total_implicit_h() == 10);
  CHECK(m.ring_count() == 1);
  for (int i = 0; i < 5; ++i) {
    CHECK(m.atom(i).ring_member);
    CHECK(m.implicit_h(i) == 2);
  }
}

TEST_CASE("parse_smiles hexane chain") {
  MolGraph m = parse_smiles("CCCCCC");
  CHECK(m.atom_count() == 6);
  CHECK(m.bond_count() == 5);
  Composition comp = composition(m);
  CHECK(comp.category() == Composition::Category::HC);
  CHECK(comp.c == 6);
  CHECK(comp.h == 14);
}

TEST_CASE("parse_smiles methyl acetate") {
  MolGraph m = parse_smiles("CC(=O)OC");
  int n_oxygen = 0, n_double = 0;
  for (int i = 0; i < m.atom_count(); ++i)
    if (m.atom(i).element == Element::O) ++n_oxygen;
  for (int b = 0; b < m.bond_count(); ++b)
    if (m.bond(b).order == BondOrder::Double) ++n_double;
  CHECK(n_oxygen == 2);
  CHECK(n_double == 1);
  // Hand sum with the pinned weights: 3*12.011 + 6*1.008 + 2*15.999.
  CHECK(mol_weight(m) == doctest::Approx(74.079).epsilon(1e-6));
}

TEST_CASE("parse_smiles aromatic rings") {
  MolGraph benzene = parse_smiles("c1ccccc1");
  CHECK(benzene.atom_count() == 6);
  CHECK(benzene.total_implicit_h() == 6);
  for (int b = 0; b < benzene.bond_count(); ++b)
    CHECK(benzene.bond(b).order == BondOrder::Aromatic);

  MolGraph naphthalene = parse_smiles("c1ccc2ccccc2c1");
  CHECK(naphthalene.atom_count() == 10);
  CHECK(naphthalene.total_implicit_h() == 8);
  CHECK(naphthalene.ring_count() == 2);

  MolGraph furan = parse_smiles("c1ccoc1");
  CHECK(furan.total_implicit_h() == 4);
  CHECK(furan.implicit_h(3) == 0);
}

TEST_CASE("parse_smiles error kinds") {
  CHECK(parse_error_kind("CCl") == ChemErrorKind::UnsupportedToken);
  CHECK(parse_error_kind("C[N]") == ChemErrorKind::UnsupportedToken);
  CHECK(parse_error_kind("CC=") == ChemErrorKind::UnsupportedToken);
  CHECK(parse_error_kind("") == ChemErrorKind::UnsupportedToken);
  CHECK(parse_error_kind("C1CC") == ChemErrorKind::UnclosedRing);
  CHECK(parse_error_kind("C(C") == ChemErrorKind::UnbalancedParenthesis);
  CHECK(parse_error_kind("CC)C") == ChemErrorKind::UnbalancedParenthesis);
  CHECK(parse_error_kind("C(=O)(O)(O)O") == ChemErrorKind::ValenceError);
  CHECK(parse_error_kind("O=C(F)(F)F") == ChemErrorKind::ValenceError);
  // Aromatic atoms must close into an aromatic ring.
  CHECK(parse_error_kind("cc") == ChemErrorKind::ValenceError);
  CHECK(parse_error_kind("ccc") == ChemErrorKind::ValenceError);
}

TEST_CASE("to_smiles basics") {
  MolGraphBuilder b;
  b.add_atom(Element::C);
  CHECK(to_smiles(b.build()) == "C");

  MolGraph ring = parse_smiles("C1CCCC1");
  MolGraph round = parse_smiles(to_smiles(ring));
  CHECK(round.atom_count() == 5);
  CHECK(round.ring_count() == 1);
  CHECK(testutil::graphs_isomorphic(ring, round));
}

TEST_CASE("to_smiles canonical under atom permutation") {
  MolGraph hexane_a = parse_smiles("CCCCCC");
  // Same molecule entered middle-out.
  MolGraphBuilder b;
  for (int i = 0; i < 6; ++i) b.add_atom(Element::C);
  b.add_bond(3, 1, BondOrder::Single);
  b.add_bond(1, 4, BondOrder::Single);
  b.add_bond(4, 0, BondOrder::Single);
  b.add_bond(0, 5, BondOrder::Single);
  b.add_bond(5, 2, BondOrder::Single);
  MolGraph hexane_b = b.build();
  CHECK(testutil::graphs_isomorphic(hexane_a, hexane_b));
  CHECK(to_smiles(hexane_a) == to_smiles(hexane_b));
}

TEST_CASE("round trip over a hand corpus") {
  const std::vector<std::string> corpus = {
      "C", "CC", "CCC", "CCCCCC", "C1CCCC1", "C1CCCCC1",
      "c1ccccc1", "Cc1ccccc1", "c1ccc2ccccc2c1", "CC(=O)OC",
      "CC(=O)O", "CC(C)(C)C", "CC(C)CC(C)(C)C", "OCC(O)CO",
      "FC(F)(F)C(F)(F)F", "C#CC", "CC=CC", "O=C=O", "CCOC(=O)C",
      "c1ccoc1", "CC(C)Cc1ccccc1", "OC1CCCCC1", "C1CC2CCC1CC2",
      "CCCCCCCCCCCC", "CC(CC(C)(C)C)C(C)C", "O=C(O)CCCCC(=O)O"};
  for (const auto& s : corpus) {
    MolGraph m = parse_smiles(s);
    std::string written = to_smiles(m);
    MolGraph re = parse_smiles(written);
    CHECK_MESSAGE(testutil::graphs_isomorphic(m, re), "round trip failed for ", s,
                  " (wrote ", written, ")");
    // And the writer is a fixed point after one round.
    CHECK(to_smiles(re) == written);
  }
}

TEST_CASE("mol_weight hand sums") {
  MolGraphBuilder b;
  b.add_atom(Element::C);
  CHECK(mol_weight(b.build()) == doctest::Approx(16.043).epsilon(1e-9));  // CH4
  CHECK(mol_weight(parse_smiles("CCCCCC")) == doctest::Approx(86.178).epsilon(1e-9));
  // C6F14 with the pinned weights: 6*12.011 + 14*18.998 = 338.038.
  MolGraph pfh = parse_smiles("C(F)(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F");
  CHECK(mol_weight(pfh) == doctest::Approx(338.038).epsilon(1e-9));
  CHECK(composition(pfh).category() == Composition::Category::CF);
}

TEST_CASE("composition categories") {
  CHECK(composition(parse_smiles("CCCCCC")).category() == Composition::Category::HC);
  CHECK(composition(parse_smiles("CC(=O)OC")).category() == Composition::Category::HCO);
  CHECK(composition(parse_smiles("OCC(F)CC")).category() == Composition::Category::HCOF);
  CHECK(composition(parse_smiles("CC(F)CC")).category() == Composition::Category::HCF);
  CHECK(composition(parse_smiles("O")).category() == Composition::Category::Other);
}

TEST_CASE("static descriptors") {
  auto names = static_descriptor_names();
  auto hex = static_descriptors(parse_smiles("CCCCCC"));
  REQUIRE(hex.size() == names.size());
  auto at = [&](const char* name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return hex[i];
    FAIL("missing descriptor ", name);
    return 0.0;
  };
  CHECK(at("MW") == doctest::Approx(86.178));
  CHECK(at("RingCount") == 0.0);
  CHECK(at("BranchingIndex") == 0.0);
  CHECK(at("LongestChain") == 6.0);
  CHECK(at("RotatableBonds") == 3.0);

  auto cyc = static_descriptors(parse_smiles("C1CCCC1"));
  CHECK(cyc[6] == 1.0);  // RingCount
  CHECK(cyc[7] == 0.0);  // AromaticAtoms

  auto tol = static_descriptors(parse_smiles("Cc1ccccc1"));
  CHECK(tol[7] == 6.0);  // AromaticAtoms
  CHECK(tol[6] == 1.0);  // RingCount

  auto diol = static_descriptors(parse_smiles("OCCO"));
  CHECK(diol[10] == 2.0);  // HBondDonors
}

TEST_CASE("morgan fingerprint radius 0 environments") {
  MolGraph hexane = parse_smiles("CCCCCC");
  Fingerprint fp = morgan_fingerprint(hexane, 0, 2048);
  // Two distinct atom environments: terminal CH3 and interior CH2.
  CHECK(fp.popcount() <= 2);
  CHECK(fp.popcount() >= 1);

  Fingerprint fp2 = morgan_fingerprint(hexane, 0, 2048);
  CHECK(fp == fp2);
}

TEST_CASE("morgan fingerprint disjoint for disjoint chemistry") {
  MolGraph hexane = parse_smiles("CCCCCC");
  MolGraph pfh = parse_smiles("C(F)(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F");
  Fingerprint a = morgan_fingerprint(hexane, 1, 2048);
  Fingerprint b = morgan_fingerprint(pfh, 1, 2048);
  int shared = 0;
  for (int bit = 0; bit < 2048; ++bit)
    if (a.test(bit) && b.test(bit)) ++shared;
  CHECK(shared == 0);
}

TEST_CASE("morgan fingerprint invariant under atom permutation") {
  MolGraph m1 = parse_smiles("CC(C)CC(=O)OCC");
  // Same molecule, different atom order.
  MolGraph m2 = parse_smiles("CCOC(=O)CC(C)C");
  REQUIRE(testutil::graphs_isomorphic(m1, m2));
  CHECK(morgan_fingerprint(m1, 2, 2048) == morgan_fingerprint(m2, 2, 2048));
}

TEST_CASE("morgan fingerprint width checks") {
  MolGraph m = parse_smiles("CC");
  CHECK_THROWS_AS(morgan_fingerprint(m, 2, 100), FingerprintError);
  CHECK_THROWS_AS(morgan_fingerprint(m, 2, 32), FingerprintError);
  CHECK_NOTHROW(morgan_fingerprint(m, 2, 64));
}

TEST_CASE("rogers-tanimoto hand values") {
  Fingerprint a = Fingerprint::zeros(4);
  Fingerprint b = Fingerprint::zeros(4);
  a.set(0); a.set(1);  // 1100
  b.set(0); b.set(2);  // 1010
  CHECK(rogers_tanimoto_similarity(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(rogers_tanimoto_similarity(a, a) == 1.0);
  CHECK(fingerprint_distance(a, b, SimilarityMetric::RogersTanimoto) ==
        doctest::Approx(2.0 / 3.0));

  // Exact complements: n11 = n00 = 0.
  Fingerprint c = Fingerprint::zeros(64);
  Fingerprint d = Fingerprint::zeros(64);
  for (int i = 0; i < 64; ++i) (i % 2 == 0 ? c : d).set(i);
  CHECK(rogers_tanimoto_similarity(c, d) == 0.0);

  // Plain Tanimoto variant.
  CHECK(tanimoto_similarity(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(tanimoto_similarity(a, a) == 1.0);
}

TEST_CASE("rogers-tanimoto properties on random fingerprints") {
  Rng rng(20240817);
  for (int trial = 0; trial < 50; ++trial) {
    Fingerprint a = Fingerprint::zeros(256);
    Fingerprint b = Fingerprint::zeros(256);
    for (int bit = 0; bit < 256; ++bit) {
      if (rng.uniform() < 0.2) a.set(bit);
      if (rng.uniform() < 0.2) b.set(bit);
    }
    double sab = rogers_tanimoto_similarity(a, b);
    double sba = rogers_tanimoto_similarity(b, a);
    CHECK(sab == sba);
    CHECK(sab >= 0.0);
    CHECK(sab <= 1.0);
    CHECK(rogers_tanimoto_similarity(a, a) == 1.0);
  }
  Fingerprint w64 = Fingerprint::zeros(64);
  Fingerprint w128 = Fingerprint::zeros(128);
  CHECK_THROWS_AS(rogers_tanimoto_similarity(w64, w128), FingerprintError);
}

TEST_CASE("fingerprint popcount nonzero for any molecule") {
  for (const char* s : {"C", "O", "CC", "c1ccccc1"}) {
    CHECK(morgan_fingerprint(parse_smiles(s), 2, 2048).popcount() >= 1);
  }
}

TEST_CASE("fingerprint hex export") {
  Fingerprint fp = Fingerprint::zeros(64);
  fp.set(0);
  fp.set(5);
  std::string hex = fingerprint_to_hex(fp);
  CHECK(hex.size() == 16);
  CHECK(hex[0] == '1');  // bit 0 -> lowest nibble
  CHECK(hex[1] == '2');  // bit 5 -> second nibble, value 2
}
