#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "emdsketch/measure.hpp"

namespace emdsketch {

struct GridShift {
  int s1 = 0;
  int s2 = 0;
};

enum class EmbedBasis : uint8_t { grid, cdf };

// Sparse signed ell_1 vector produced by the multi-resolution grid embedding
// or the 1-d CDF embedding. Entries are keyed by (level, cell) packed into a
// uint64 and kept sorted, so iteration order (and hence every downstream sum)
// is fixed.
class EmbeddedVector {
 public:
  struct Entry {
    uint64_t key;
    double value;
  };

  EmbeddedVector() = default;
  EmbeddedVector(EmbedBasis basis, std::vector<Entry> entries);

  EmbedBasis basis() const { return basis_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  double l1_norm() const;

  // Entrywise difference; bases must match.
  friend EmbeddedVector operator-(const EmbeddedVector& a, const EmbeddedVector& b);

  static uint64_t pack_key(int level, int cx, int cy);
  static void unpack_key(uint64_t key, int& level, int& cx, int& cy);

 private:
  EmbedBasis basis_ = EmbedBasis::grid;
  std::vector<Entry> entries_;  // sorted by key, values != 0
};

// Multi-resolution grid embedding: level t in [0, l] imposes a grid of side
// 2^t anchored at the shift; each occupied cell carries 2^t times the net
// mass inside it. delta is padded up to the next power of two; level 0 has
// unit side so distinct points always separate there. Linear in the measure
// argument: embed(x - y) = embed(x) - embed(y).
EmbeddedVector embed_grid(const GridMeasure& x, const GridMeasure* minus, GridShift shift);

// Prefix sums of a (signed difference of) 1-d measure(s) as a dense
// length-delta vector. An exact isometry on probability measures:
// ||embed_cdf(a) - embed_cdf(b)||_1 == emd_exact(a, b).
EmbeddedVector embed_cdf(const GridMeasure& x, const GridMeasure* minus = nullptr);

// Uniform shift over the padded grid, deterministic per seed.
GridShift sample_shift(int delta, uint64_t seed);

// Recursive decomposition of an EMD instance into an ell_1-sum of small EMD
// instances over blocks of side <= 2^t_param, under one randomly shifted
// hierarchy of nested grids. Each component is a signed measure on a small
// block together with a distance scale; the associated norm adds, per
// component, scale times the exact (general) EMD between its positive and
// negative parts.
struct CoarseComponent {
  double scale;     // multiplies the component's EMD value
  int side;         // block side length (component grid is [side]^dims)
  bool top_level;   // true for a cell-mass instance, false for a leaf block
  std::vector<Atom> pos;  // positive part, coords in [0, side)
  std::vector<Atom> neg;  // negative part (weights stored positive)
};

struct CoarseEmbedding {
  int delta = 0;
  int dims = 2;
  int t_param = 1;
  GridShift shift;
  std::vector<CoarseComponent> components;
};

CoarseEmbedding embed_coarse(const GridMeasure& x, const GridMeasure* minus, int t_param,
                             uint64_t seed);

// Sum over components of scale * EMD(pos, neg); the ell_1(EMD) norm of the
// embedded difference.
double coarse_norm(const CoarseEmbedding& e);

}  // namespace emdsketch
