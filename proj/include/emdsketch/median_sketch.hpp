#pragma once

#include <cstdint>
#include <vector>

#include "emdsketch/common.hpp"

namespace emdsketch {

// Weighted instance on the line [0, n).
struct MedianInstance1D {
  int n = 0;
  std::vector<std::pair<int, double>> weights;  // (position, weight >= 0)

  double total_weight() const;
  // Sum of w * |i - j|: the cost of center j.
  double cost(int j) const;
  // Exhaustive optimum over j in [0, n).
  std::pair<int, double> brute_force() const;
};

struct Median1DResult {
  int j_hat = 0;
  double cost_est = 0.0;
};

// Sketches the instance with an m x 2 block of linear measurements
// (Cauchy rows applied to the position-weighted and plain weight vectors)
// and minimizes the med-norm over candidate centers.
Median1DResult median_1d(const MedianInstance1D& inst, int m, double epsilon, uint64_t seed);

// Weighted point set in [n]^d, d <= 3.
struct MedianInstanceD {
  int n = 0;
  int d = 2;
  std::vector<std::pair<std::vector<int>, double>> points;

  double total_weight() const;
  double cost(const std::vector<int>& center) const;  // sum w * ||p - c||_2
  std::pair<std::vector<int>, double> brute_force() const;
};

struct MedianDResult {
  std::vector<int> p_hat;
  double cost_est = 0.0;
};

struct MedianDConfig {
  double c_gauss = 3.0;  // t = ceil(c_gauss * d / eps^2) Gaussian rows
};

// Gaussian ell_2 -> ell_1 embedding rows followed by an m x (d+1) Cauchy
// measurement block; candidate centers are enumerated exhaustively.
MedianDResult median_dd(const MedianInstanceD& inst, int m, double epsilon, uint64_t seed,
                        const MedianDConfig& config = {});

// t x d Gaussian matrix scaled so that ||G x||_1 <= ||x||_2 <= (1+eps)||G x||_1
// holds with margin on random vectors (row-major).
std::vector<double> dvoretsky_map(int t, int d, double epsilon, uint64_t seed);

struct SubspaceCheckReport {
  int samples = 0;
  int within = 0;          // samples with the med-norm sandwich satisfied
  double worst_low = 1.0;  // min med/ell1 ratio seen
  double worst_high = 1.0; // max med/ell1 ratio seen
};

// Empirically checks (1-eps)||x||_1 <= med|Ax| <= (1+eps)||x||_1 for random
// vectors x from the span of the given basis (vectors of common length).
SubspaceCheckReport cauchy_subspace_check(const std::vector<std::vector<double>>& basis, int m,
                                          double epsilon, uint64_t seed, int samples = 500);

}  // namespace emdsketch
