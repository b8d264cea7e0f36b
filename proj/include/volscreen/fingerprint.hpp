#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "volscreen/molgraph.hpp"

namespace volscreen {

enum class FingerprintErrorKind { InvalidWidth, WidthMismatch };

class FingerprintError : public std::runtime_error {
 public:
  FingerprintError(FingerprintErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  FingerprintErrorKind kind() const { return kind_; }

 private:
  FingerprintErrorKind kind_;
};

struct Fingerprint {
  std::vector<std::uint64_t> words;
  int nbits = 0;
  int radius = 0;

  static Fingerprint zeros(int nbits, int radius = 0);
  void set(int bit);
  bool test(int bit) const;
  int popcount() const;

  bool operator==(const Fingerprint& other) const {
    return nbits == other.nbits && words == other.words;
  }
};

// Circular fingerprint by iterative neighborhood hashing. The initial atom
// identifier hashes (element, heavy degree, implicit H, aromatic, ring flag);
// round r folds the sorted (bond order, neighbor id) pairs of round r-1 into a
// new id. Every identifier from every round sets bit (id mod nbits). Hashing
// is 64-bit FNV-1a with pinned constants, so bit patterns are identical across
// platforms and runs.
Fingerprint morgan_fingerprint(const MolGraph& mol, int radius = 2, int nbits = 2048);

enum class SimilarityMetric { RogersTanimoto, Tanimoto };

SimilarityMetric similarity_metric_from_name(const std::string& name);
const char* similarity_metric_name(SimilarityMetric m);

// (n11 + n00) / (n11 + n00 + 2*(n10 + n01)); counts shared unset bits, which
// makes it width-sensitive for sparse fingerprints.
double rogers_tanimoto_similarity(const Fingerprint& a, const Fingerprint& b);

// n11 / (n11 + n10 + n01); two all-zero fingerprints count as identical.
double tanimoto_similarity(const Fingerprint& a, const Fingerprint& b);

double similarity(const Fingerprint& a, const Fingerprint& b, SimilarityMetric m);
double fingerprint_distance(const Fingerprint& a, const Fingerprint& b, SimilarityMetric m);

// Lowercase hex, lowest byte first; nbits/4 characters.
std::string fingerprint_to_hex(const Fingerprint& fp);

}  // namespace volscreen
