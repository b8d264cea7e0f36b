#include "volscreen/fingerprint.hpp"

#include <algorithm>
#include <bit>

#include "volscreen/rng.hpp"

namespace volscreen {

Fingerprint Fingerprint::zeros(int nbits, int radius) {
  Fingerprint fp;
  fp.nbits = nbits;
  fp.radius = radius;
  fp.words.assign(static_cast<std::size_t>((nbits + 63) / 64), 0);
  return fp;
}

void Fingerprint::set(int bit) {
  words[static_cast<std::size_t>(bit / 64)] |= (std::uint64_t{1} << (bit % 64));
}

bool Fingerprint::test(int bit) const {
  return (words[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1u;
}

int Fingerprint::popcount() const {
  int c = 0;
  for (std::uint64_t w : words) c += std::popcount(w);
  return c;
}

Fingerprint morgan_fingerprint(const MolGraph& mol, int radius, int nbits) {
  if (nbits < 64 || (nbits & (nbits - 1)) != 0)
    throw FingerprintError(FingerprintErrorKind::InvalidWidth,
                           "fingerprint width must be a power of two >= 64");
  if (radius < 0)
    throw FingerprintError(FingerprintErrorKind::InvalidWidth, "radius must be >= 0");

  Fingerprint fp = Fingerprint::zeros(nbits, radius);
  const int n = mol.atom_count();

  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    std::uint64_t h = kFnvOffsetBasis;
    h = fnv1a64_u64(static_cast<std::uint64_t>(a.element), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(mol.degree(i)), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(mol.implicit_h(i)), h);
    h = fnv1a64_u64(a.aromatic ? 1u : 0u, h);
    h = fnv1a64_u64(a.ring_member ? 1u : 0u, h);
    ids[static_cast<std::size_t>(i)] = h;
    fp.set(static_cast<int>(h % static_cast<std::uint64_t>(nbits)));
  }

  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
      for (const auto& nb : mol.neighbors(i)) {
        env.emplace_back(static_cast<std::uint64_t>(nb.order),
                         ids[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = fnv1a64_u64(ids[static_cast<std::size_t>(i)]);
      for (const auto& [order, id] : env) {
        h = fnv1a64_u64(order, h);
        h = fnv1a64_u64(id, h);
      }
      next[static_cast<std::size_t>(i)] = h;
      fp.set(static_cast<int>(h % static_cast<std::uint64_t>(nbits)));
    }
    ids = std::move(next);
  }
  return fp;
}

namespace {

struct BitCounts {
  long n11 = 0;
  long n00 = 0;
  long mismatch = 0;
};

BitCounts count_bits(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits)
    throw FingerprintError(FingerprintErrorKind::WidthMismatch,
                           "fingerprint widths differ");
  BitCounts c;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    std::uint64_t x = a.words[w], y = b.words[w];
    // Mask tail bits beyond nbits in the last word (always zero by
    // construction, but n00 must not count them).
    c.n11 += std::popcount(x & y);
    c.mismatch += std::popcount(x ^ y);
  }
  c.n00 = a.nbits - c.n11 - c.mismatch;
  return c;
}

}  // namespace

double rogers_tanimoto_similarity(const Fingerprint& a, const Fingerprint& b) {
  BitCounts c = count_bits(a, b);
  const double denom = static_cast<double>(c.n11 + c.n00 + 2 * c.mismatch);
  if (denom == 0.0) return 1.0;  // zero-width is impossible; both empty
  return static_cast<double>(c.n11 + c.n00) / denom;
}

double tanimoto_similarity(const Fingerprint& a, const Fingerprint& b) {
  BitCounts c = count_bits(a, b);
  const double denom = static_cast<double>(c.n11 + c.mismatch);
  if (denom == 0.0) return 1.0;  // both fingerprints empty
  return static_cast<double>(c.n11) / denom;
}

double similarity(const Fingerprint& a, const Fingerprint& b, SimilarityMetric m) {
  return m == SimilarityMetric::RogersTanimoto ? rogers_tanimoto_similarity(a, b)
                                               : tanimoto_similarity(a, b);
}

double fingerprint_distance(const Fingerprint& a, const Fingerprint& b, SimilarityMetric m) {
  return 1.0 - similarity(a, b, m);
}

SimilarityMetric similarity_metric_from_name(const std::string& name) {
  if (name == "rogers_tanimoto") return SimilarityMetric::RogersTanimoto;
  if (name == "tanimoto") return SimilarityMetric::Tanimoto;
  throw std::invalid_argument("unknown similarity metric: " + name);
}

const char* similarity_metric_name(SimilarityMetric m) {
  return m == SimilarityMetric::RogersTanimoto ? "rogers_tanimoto" : "tanimoto";
}

std::string fingerprint_to_hex(const Fingerprint& fp) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<std::size_t>(fp.nbits / 4));
  for (int nibble = 0; nibble < fp.nbits / 4; ++nibble) {
    int v = 0;
    for (int k = 0; k < 4; ++k) {
      if (fp.test(nibble * 4 + k)) v |= (1 << k);
    }
    out += digits[v];
  }
  return out;
}

}  // namespace volscreen
