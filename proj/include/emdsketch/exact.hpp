#pragma once

#include <utility>
#include <vector>

#include "emdsketch/measure.hpp"

namespace emdsketch {

struct EmdResult {
  double cost = 0.0;
  TransportPlan plan;
};

// Exact Earth-Mover Distance between two measures on the same grid, with
// ell_1 ground costs. Equal-mass inputs solve the pure transportation
// problem; otherwise leftovers are penalized at the diameter rate
// D = dims * delta per unit, which is modeled as one flow problem with a
// dummy row/column so partial transport is never forced.
EmdResult emd_exact(const GridMeasure& a, const GridMeasure& b);

// EMD between 1-d probability measures via the prefix-sum identity
// EMD(a, b) = || CDF(a) - CDF(b) ||_1. Exact, O(n log n).
double emd_cdf_1d(const GridMeasure& a, const GridMeasure& b);

struct KSparseResult {
  std::vector<Atom> centers;  // chosen center points (weight field unused)
  double cost = 0.0;
  GridMeasure approx;  // each point's mass placed on its nearest center
};

// Exhaustive best k-sparse approximation (k-median with ell_1 costs) over a
// finite candidate center set. Empty candidate set selects the default:
// the full grid for delta <= 16, otherwise support plus a coarse sub-grid.
KSparseResult best_k_sparse(const GridMeasure& x, int k,
                            std::vector<Atom> candidate_centers = {});

// Default candidate centers used by best_k_sparse.
std::vector<Atom> default_center_candidates(const GridMeasure& x);

bool check_granularity(const GridMeasure& x, const GranularitySpec& g);

}  // namespace emdsketch
