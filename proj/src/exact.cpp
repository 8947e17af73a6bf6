#include "emdsketch/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emdsketch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Successive shortest augmenting paths with node potentials on the dense
// bipartite support graph. Supplies and flows are doubles; arc costs are
// small integers (ell_1 distances), so the optimal value is a plain sum of
// weight*distance products and carries no solver-induced error beyond
// ~1e-13. Residual masses below 1e-13 of the total are clamped to zero to
// terminate degenerate augmentations.
//
// Unbalanced instances get a dummy source (supply ||b||) and dummy target
// (demand ||a||) with arcs priced at the diameter D = dims*delta and a free
// dummy-dummy arc; this realizes the penalty form of the general EMD.
struct TransportSolver {
  int n = 0, m = 0;  // real sources / targets (dummies are index n and m)
  std::vector<double> supply, demand;
  std::vector<std::vector<double>> cost;  // (n+1) x (m+1)
  std::vector<std::vector<double>> flow;

  double solve() {
    int N = n + 1, M = m + 1;
    flow.assign(N, std::vector<double>(M, 0.0));
    std::vector<double> pot_src(N, 0.0), pot_dst(M, 0.0);
    double total_supply = 0.0;
    for (double s : supply) total_supply += s;
    const double eps = std::max(1e-13 * std::max(total_supply, 1.0), 1e-300);

    double total_cost = 0.0;
    for (;;) {
      // Any source with remaining supply; stop when all are drained.
      bool active = false;
      for (int i = 0; i < N; ++i)
        if (supply[i] > eps) active = true;
      if (!active) break;

      // Dijkstra over the bipartite residual graph with reduced costs.
      std::vector<double> dist_s(N, kInf), dist_t(M, kInf);
      std::vector<int> par_t(M, -1);   // source feeding each target on path
      std::vector<int> par_s(N, -1);   // target feeding each source (via residual arc)
      std::vector<bool> done_s(N, false), done_t(M, false);
      for (int i = 0; i < N; ++i)
        if (supply[i] > eps) dist_s[i] = 0.0;

      int reached_target = -1;
      for (;;) {
        // pick unfinished node with min dist among sources and targets
        double best = kInf;
        int bi = -1;
        bool is_src = true;
        for (int i = 0; i < N; ++i)
          if (!done_s[i] && dist_s[i] < best) best = dist_s[i], bi = i, is_src = true;
        for (int j = 0; j < M; ++j)
          if (!done_t[j] && dist_t[j] < best) best = dist_t[j], bi = j, is_src = false;
        if (bi < 0) break;
        if (is_src) {
          done_s[bi] = true;
          for (int j = 0; j < M; ++j) {
            if (done_t[j]) continue;
            double rc = cost[bi][j] - pot_src[bi] - pot_dst[j];
            double nd = dist_s[bi] + rc;
            if (nd < dist_t[j] - 1e-15) {
              dist_t[j] = nd;
              par_t[j] = bi;
            }
          }
        } else {
          done_t[bi] = true;
          if (demand[bi] > eps && reached_target < 0) reached_target = bi;
          for (int i = 0; i < N; ++i) {
            if (done_s[i] || flow[i][bi] <= eps) continue;
            double rc = -(cost[i][bi] - pot_src[i] - pot_dst[bi]);
            double nd = dist_t[bi] + rc;
            if (nd < dist_s[i] - 1e-15) {
              dist_s[i] = nd;
              par_s[i] = bi;
            }
          }
        }
      }
      require(reached_target >= 0, "emd_exact: internal flow error (no augmenting path)");

      // potentials update
      for (int i = 0; i < N; ++i)
        if (dist_s[i] < kInf) pot_src[i] += dist_s[i];
      for (int j = 0; j < M; ++j)
        if (dist_t[j] < kInf) pot_dst[j] -= dist_t[j];

      // walk path target <- source <- target ... and find bottleneck
      double push = demand[reached_target];
      {
        int t = reached_target;
        for (;;) {
          int s = par_t[t];
          push = std::min(push, supply[s]);
          int tprev = par_s[s];
          if (tprev < 0) break;
          push = std::min(push, flow[s][tprev]);
          t = tprev;
        }
      }
      // apply
      {
        int t = reached_target;
        for (;;) {
          int s = par_t[t];
          flow[s][t] += push;
          int tprev = par_s[s];
          if (tprev < 0) {
            supply[s] -= push;
            if (supply[s] < eps) supply[s] = 0.0;
            break;
          }
          flow[s][tprev] -= push;
          if (flow[s][tprev] < eps) flow[s][tprev] = 0.0;
          t = tprev;
        }
        demand[reached_target] -= push;
        if (demand[reached_target] < eps) demand[reached_target] = 0.0;
      }
      (void)total_cost;
    }

    double value = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < M; ++j)
        if (flow[i][j] > 0.0) value += flow[i][j] * cost[i][j];
    return value;
  }
};

}  // namespace

EmdResult emd_exact(const GridMeasure& a, const GridMeasure& b) {
  require(a.delta() == b.delta(), "emd_exact: delta mismatch");
  require(a.dims() == b.dims(), "emd_exact: dims mismatch");

  if (a == b) return EmdResult{0.0, {}};

  const auto& A = a.atoms();
  const auto& B = b.atoms();
  double mass_a = a.total_mass();
  double mass_b = b.total_mass();
  double D = static_cast<double>(a.dims()) * a.delta();

  TransportSolver s;
  s.n = static_cast<int>(A.size());
  s.m = static_cast<int>(B.size());
  s.supply.assign(s.n + 1, 0.0);
  s.demand.assign(s.m + 1, 0.0);
  for (int i = 0; i < s.n; ++i) s.supply[i] = A[i].w;
  for (int j = 0; j < s.m; ++j) s.demand[j] = B[j].w;
  s.supply[s.n] = mass_b;  // dummy source can fill all of b at price D
  s.demand[s.m] = mass_a;  // dummy target can absorb all of a at price D
  s.cost.assign(s.n + 1, std::vector<double>(s.m + 1, 0.0));
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.m; ++j) s.cost[i][j] = l1_dist(A[i], B[j]);
    s.cost[i][s.m] = D;
  }
  for (int j = 0; j < s.m; ++j) s.cost[s.n][j] = D;
  s.cost[s.n][s.m] = 0.0;

  double value = s.solve();

  TransportPlan plan;
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.m; ++j) {
      if (s.flow[i][j] > 1e-12) {
        plan.edges.push_back({A[i].x, A[i].y, B[j].x, B[j].y, s.flow[i][j]});
      }
    }
    if (s.flow[i][s.m] > 1e-12) plan.slack_source_mass += s.flow[i][s.m];
  }
  for (int j = 0; j < s.m; ++j) {
    if (s.flow[s.n][j] > 1e-12) plan.slack_target_mass += s.flow[s.n][j];
  }
  return EmdResult{value, std::move(plan)};
}

double emd_cdf_1d(const GridMeasure& a, const GridMeasure& b) {
  require(a.dims() == 1 && b.dims() == 1, "emd_cdf_1d: both measures must be 1-d");
  require(a.delta() == b.delta(), "emd_cdf_1d: delta mismatch");
  require(a.is_probability() && b.is_probability(),
          "emd_cdf_1d: both measures must be probability measures");

  // Sweep positions in order, integrating |F_a - F_b| over unit gaps.
  std::size_t ia = 0, ib = 0;
  const auto& A = a.atoms();
  const auto& B = b.atoms();
  double fa = 0.0, fb = 0.0, cost = 0.0;
  int prev = 0;
  while (ia < A.size() || ib < B.size()) {
    int x = std::min(ia < A.size() ? A[ia].x : a.delta(), ib < B.size() ? B[ib].x : b.delta());
    cost += std::abs(fa - fb) * (x - prev);
    while (ia < A.size() && A[ia].x == x) fa += A[ia++].w;
    while (ib < B.size() && B[ib].x == x) fb += B[ib++].w;
    prev = x;
  }
  cost += std::abs(fa - fb) * (a.delta() - 1 - prev);  // tail is zero for prob pairs
  return cost;
}

std::vector<Atom> default_center_candidates(const GridMeasure& x) {
  std::vector<Atom> cand;
  int delta = x.delta();
  if (delta <= 16) {
    for (int i = 0; i < delta; ++i) {
      if (x.dims() == 2) {
        for (int j = 0; j < delta; ++j) cand.push_back({i, j, 0.0});
      } else {
        cand.push_back({i, 0, 0.0});
      }
    }
    return cand;
  }
  // support plus a coarse sub-grid
  int step = (delta + 15) / 16;
  for (int i = 0; i < delta; i += step) {
    if (x.dims() == 2) {
      for (int j = 0; j < delta; j += step) cand.push_back({i, j, 0.0});
    } else {
      cand.push_back({i, 0, 0.0});
    }
  }
  for (const Atom& a : x.atoms()) cand.push_back({a.x, a.y, 0.0});
  std::sort(cand.begin(), cand.end(), [](const Atom& p, const Atom& q) {
    return std::tie(p.x, p.y) < std::tie(q.x, q.y);
  });
  cand.erase(std::unique(cand.begin(), cand.end(),
                         [](const Atom& p, const Atom& q) { return p.x == q.x && p.y == q.y; }),
             cand.end());
  return cand;
}

KSparseResult best_k_sparse(const GridMeasure& x, int k, std::vector<Atom> candidate_centers) {
  require(k >= 1, "best_k_sparse: k must be >= 1");
  if (candidate_centers.empty()) candidate_centers = default_center_candidates(x);
  require(k <= static_cast<int>(candidate_centers.size()),
          "best_k_sparse: k exceeds candidate count");

  const auto& atoms = x.atoms();
  const int n = static_cast<int>(atoms.size());
  const int nc = static_cast<int>(candidate_centers.size());

  // Zero cost shortcut: support fits in k centers.
  if (n <= k) {
    KSparseResult r;
    for (const Atom& a : atoms) r.centers.push_back({a.x, a.y, 0.0});
    r.cost = 0.0;
    r.approx = x;
    return r;
  }

  std::vector<double> dist(static_cast<std::size_t>(nc) * n);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < n; ++i)
      dist[static_cast<std::size_t>(c) * n + i] = l1_dist(candidate_centers[c], atoms[i]);

  std::vector<int> best_subset;
  double best_cost = kInf;
  std::vector<int> idx(k);
  std::vector<double> mind;

  // Plain subset enumeration with incremental min-distance vectors.
  std::vector<std::vector<double>> stack_min(k + 1, std::vector<double>(n, kInf));
  std::function<void(int, int)> rec = [&](int depth, int start) {
    if (depth == k) {
      double c = 0.0;
      const auto& md = stack_min[depth];
      for (int i = 0; i < n; ++i) c += atoms[i].w * md[i];
      if (c < best_cost - 1e-15) {
        best_cost = c;
        best_subset.assign(idx.begin(), idx.end());
      }
      return;
    }
    for (int c = start; c <= nc - (k - depth); ++c) {
      idx[depth] = c;
      auto& cur = stack_min[depth + 1];
      const auto& prev = stack_min[depth];
      const double* dc = &dist[static_cast<std::size_t>(c) * n];
      for (int i = 0; i < n; ++i) cur[i] = std::min(prev[i], dc[i]);
      rec(depth + 1, c + 1);
    }
  };
  rec(0, 0);

  KSparseResult r;
  std::vector<Atom> approx_atoms;
  for (int ci : best_subset) r.centers.push_back({candidate_centers[ci].x, candidate_centers[ci].y, 0.0});
  // place each atom's mass on its nearest chosen center (ties: first center)
  for (int i = 0; i < n; ++i) {
    int best_c = -1;
    double bd = kInf;
    for (int ci : best_subset) {
      double d = dist[static_cast<std::size_t>(ci) * n + i];
      if (d < bd - 1e-15) bd = d, best_c = ci;
    }
    approx_atoms.push_back({candidate_centers[best_c].x, candidate_centers[best_c].y, atoms[i].w});
  }
  r.cost = best_cost;
  r.approx = GridMeasure::make(x.delta(), x.dims(), x.kind(), std::move(approx_atoms));
  return r;
}

bool check_granularity(const GridMeasure& x, const GranularitySpec& g) {
  require(g.N >= 1, "granularity: N must be >= 1");
  for (const Atom& a : x.atoms()) {
    double scaled = a.w * static_cast<double>(g.N);
    if (std::abs(scaled - std::round(scaled)) > kMassTol) return false;
  }
  return true;
}

}  // namespace emdsketch
