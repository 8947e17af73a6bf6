#pragma once

#include <cstdint>
#include <vector>

#include "emdsketch/measure.hpp"

namespace emdsketch {

// Packing family certifying the doubling-dimension lower bound: an anchor set
// A of weight-2 points and, per index tuple I, a set B_I splitting each
// anchor into a heavy point and a light point offset by 2^{i_j}; every B_I
// sits at the same exact EMD from A.
struct PackingFamily {
  int k = 2;
  int delta = 2;
  int dims = 1;
  int pairs = 1;            // anchors carrying index choices
  int log_u = 0;            // index alphabet is {0, ..., log_u}
  double expected_distance = 1.0;  // EMD(A, B_I) for every I
  GridMeasure A;
  std::vector<Atom> anchors;  // weight-2 anchor points, one per pair

  double family_cardinality() const;  // (log_u + 1)^pairs
  GridMeasure B(const std::vector<int>& index_tuple) const;
  std::vector<int> sample_index(uint64_t seed) const;
};

// 1-d family: anchors at spacing 2*delta/k, offsets up to U = delta/k.
// EMD(A, B_I) = k/2 for every I. Requires k even, k > 1, delta a power of
// two, k <= delta.
PackingFamily gen_packing_1d(int k, int delta);

// 2-d family: k/4 anchors folded into sqrt(k)/2 rows at pitch 2*delta/sqrt(k),
// offsets along the row up to delta/sqrt(k). EMD(A, B_I) = k/4. Requires k a
// power of four, k >= 4, delta a power of two, sqrt(k) <= delta.
PackingFamily gen_packing_2d(int k, int delta);

struct ProbeResult {
  int sampled = 0;
  int in_ball = 0;     // sampled B_I with EMD(A, B_I) <= r_big
  int distinct = 0;    // distinct index tuples among them
  int separated = 0;   // greedy r_small-separated subset size
  double lb_dimension = 0.0;  // log2(separated): doubling-dimension lower bound
};

// Samples index tuples, keeps the B_I inside B(A, r_big) and greedily
// extracts an r_small-separated subset; log2 of its size lower-bounds the
// doubling dimension up to the radius ratio. Measures are normalized to
// probability scale before distance evaluation and distances rescaled back.
ProbeResult doubling_probe(const PackingFamily& family, double r_big, double r_small,
                           int samples, uint64_t seed);

}  // namespace emdsketch
