#include "emdsketch/median_sketch.hpp"

#include <algorithm>
#include <cmath>

#include "emdsketch/rng.hpp"
#include "emdsketch/sketch.hpp"

namespace emdsketch {

double MedianInstance1D::total_weight() const {
  double s = 0.0;
  for (const auto& [i, w] : weights) s += w;
  return s;
}

double MedianInstance1D::cost(int j) const {
  double s = 0.0;
  for (const auto& [i, w] : weights) s += w * std::abs(i - j);
  return s;
}

std::pair<int, double> MedianInstance1D::brute_force() const {
  int best = 0;
  double bc = cost(0);
  for (int j = 1; j < n; ++j) {
    double c = cost(j);
    if (c < bc) bc = c, best = j;
  }
  return {best, bc};
}

Median1DResult median_1d(const MedianInstance1D& inst, int m, double epsilon, uint64_t seed) {
  require(inst.n >= 1, "median_1d: empty domain");
  require(m >= 1, "median_1d: m must be >= 1");
  require(epsilon > 0.0, "median_1d: epsilon must be positive");
  for (const auto& [i, w] : inst.weights) {
    require(i >= 0 && i < inst.n, "median_1d: position out of range");
    require(w >= 0.0, "median_1d: negative weight");
  }
  require(inst.total_weight() > 0.0, "median_1d: all-zero weights (median undefined)");

  // Observed block: col1[r] = sum_i A[r,i] x_i i, col2[r] = sum_i A[r,i] x_i.
  // These are 2m linear measurements of x.
  std::vector<double> col1(m, 0.0), col2(m, 0.0);
  for (const auto& [i, w] : inst.weights) {
    if (w == 0.0) continue;
    for (int r = 0; r < m; ++r) {
      double a = cauchy_entry(seed, r, static_cast<uint64_t>(i));
      col1[r] += a * w * i;
      col2[r] += a * w;
    }
  }

  // Candidate direction for center j recovers sum_i x_i |i - j| as the ell_1
  // norm of the measured subspace vector.
  Median1DResult res;
  double best = -1.0;
  std::vector<double> v(m);
  for (int j = 0; j < inst.n; ++j) {
    for (int r = 0; r < m; ++r) v[r] = col1[r] - static_cast<double>(j) * col2[r];
    double med = median_abs(v);
    if (best < 0.0 || med < best) {
      best = med;
      res.j_hat = j;
      res.cost_est = med;
    }
  }
  return res;
}

double MedianInstanceD::total_weight() const {
  double s = 0.0;
  for (const auto& [p, w] : points) s += w;
  return s;
}

double MedianInstanceD::cost(const std::vector<int>& center) const {
  double s = 0.0;
  for (const auto& [p, w] : points) {
    double sq = 0.0;
    for (int a = 0; a < d; ++a) {
      double diff = p[a] - center[a];
      sq += diff * diff;
    }
    s += w * std::sqrt(sq);
  }
  return s;
}

std::pair<std::vector<int>, double> MedianInstanceD::brute_force() const {
  std::vector<int> c(d, 0), best(d, 0);
  double bc = cost(c);
  for (;;) {
    int a = 0;
    while (a < d && ++c[a] == n) c[a++] = 0;
    if (a == d) break;
    double v = cost(c);
    if (v < bc) bc = v, best = c;
  }
  return {best, bc};
}

std::vector<double> dvoretsky_map(int t, int d, double epsilon, uint64_t seed) {
  // E||Gx||_1 lands at ||x||_2 / (1 + eps/2), so both sandwich sides hold
  // with t = O(d / eps^2) rows.
  double scale = std::sqrt(3.141592653589793 / 2.0) / t / (1.0 + epsilon / 2.0);
  std::vector<double> g(static_cast<std::size_t>(t) * d);
  Rng rng(derive_seed(seed, 0xd4e));
  for (double& v : g) v = scale * rng.gaussian();
  return g;
}

MedianDResult median_dd(const MedianInstanceD& inst, int m, double epsilon, uint64_t seed,
                        const MedianDConfig& config) {
  require(inst.n >= 1 && inst.d >= 1 && inst.d <= 3, "median_dd: d must be in {1,2,3}");
  require(m >= 1 && epsilon > 0.0, "median_dd: bad sketch parameters");
  for (const auto& [p, w] : inst.points) {
    require(static_cast<int>(p.size()) == inst.d, "median_dd: point dimension mismatch");
    require(w >= 0.0, "median_dd: negative weight");
    for (int a = 0; a < inst.d; ++a)
      require(p[a] >= 0 && p[a] < inst.n, "median_dd: coordinate out of range");
  }
  require(inst.total_weight() > 0.0, "median_dd: zero total weight");

  const int d = inst.d;
  const int t = std::max(1, static_cast<int>(std::ceil(config.c_gauss * d / (epsilon * epsilon))));
  std::vector<double> G = dvoretsky_map(t, d, epsilon, derive_seed(seed, 1));

  // Observed block M = A C_x G' in R^{m x (d+1)}; column j<d pairs Cauchy
  // rows with G's j-th column, column d with the per-point image G p.
  std::vector<double> M(static_cast<std::size_t>(m) * (d + 1), 0.0);
  uint64_t A_seed = derive_seed(seed, 2);
  std::vector<double> gp(t);
  for (std::size_t pi = 0; pi < inst.points.size(); ++pi) {
    const auto& [p, w] = inst.points[pi];
    if (w == 0.0) continue;
    for (int s = 0; s < t; ++s) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) acc += G[static_cast<std::size_t>(s) * d + a] * p[a];
      gp[s] = acc;
    }
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < t; ++s) {
        double a_entry = cauchy_entry(A_seed, r, pi * static_cast<uint64_t>(t) + s);
        double aw = a_entry * w;
        for (int a = 0; a < d; ++a)
          M[static_cast<std::size_t>(r) * (d + 1) + a] += aw * G[static_cast<std::size_t>(s) * d + a];
        M[static_cast<std::size_t>(r) * (d + 1) + d] += aw * gp[s];
      }
    }
  }

  // minimize the med-norm over candidate centers q in [n]^d with z = (q, -1)
  MedianDResult res;
  res.p_hat.assign(d, 0);
  double best = -1.0;
  std::vector<int> q(d, 0);
  std::vector<double> v(m);
  for (;;) {
    for (int r = 0; r < m; ++r) {
      double acc = -M[static_cast<std::size_t>(r) * (d + 1) + d];
      for (int a = 0; a < d; ++a) acc += M[static_cast<std::size_t>(r) * (d + 1) + a] * q[a];
      v[r] = acc;
    }
    double med = median_abs(v);
    if (best < 0.0 || med < best) {
      best = med;
      res.p_hat = q;
      res.cost_est = med;
    }
    int a = 0;
    while (a < d && ++q[a] == inst.n) q[a++] = 0;
    if (a == d) break;
  }
  return res;
}

SubspaceCheckReport cauchy_subspace_check(const std::vector<std::vector<double>>& basis, int m,
                                          double epsilon, uint64_t seed, int samples) {
  require(!basis.empty(), "subspace check: empty basis");
  std::size_t n = basis[0].size();
  for (const auto& b : basis) require(b.size() == n, "subspace check: ragged basis");

  uint64_t A_seed = derive_seed(seed, 3);
  Rng rng(derive_seed(seed, 4));
  SubspaceCheckReport rep;
  rep.samples = samples;
  std::vector<double> x(n), ax(m);
  for (int s = 0; s < samples; ++s) {
    std::fill(x.begin(), x.end(), 0.0);
    for (const auto& b : basis) {
      double c = rng.gaussian();
      for (std::size_t i = 0; i < n; ++i) x[i] += c * b[i];
    }
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    if (l1 < 1e-12) {
      ++rep.within;  // zero vector: med-norm 0 equals ell_1
      continue;
    }
    std::fill(ax.begin(), ax.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0.0) continue;
      for (int r = 0; r < m; ++r) ax[r] += cauchy_entry(A_seed, r, i) * x[i];
    }
    double ratio = median_abs(ax) / l1;
    rep.worst_low = std::min(rep.worst_low, ratio);
    rep.worst_high = std::max(rep.worst_high, ratio);
    if (ratio >= 1.0 - epsilon && ratio <= 1.0 + epsilon) ++rep.within;
  }
  return rep;
}

}  // namespace emdsketch
