#pragma once

#include <cmath>
#include <vector>

#include "emdsketch/exact.hpp"
#include "emdsketch/measure.hpp"
#include "emdsketch/rng.hpp"

namespace emdsketch::testing {

inline GridMeasure random_probability(Rng& rng, int delta, int dims, int support) {
  std::vector<Atom> atoms;
  for (int i = 0; i < support; ++i) {
    Atom a;
    a.x = static_cast<int>(rng.below(delta));
    a.y = dims == 2 ? static_cast<int>(rng.below(delta)) : 0;
    a.w = 0.05 + rng.uniform();
    atoms.push_back(a);
  }
  double total = 0.0;
  for (const Atom& a : atoms) total += a.w;
  for (Atom& a : atoms) a.w /= total;
  return GridMeasure::make(delta, dims, MeasureKind::probability, std::move(atoms));
}

// Independent transportation oracle for balanced instances: enumerates every
// spanning tree of the complete bipartite support graph, solves the unique
// tree flow by leaf elimination, and minimizes cost over feasible trees.
// Vertices of the transportation polytope are exactly such tree solutions,
// so the minimum over them is the LP optimum. Exponential; supports <= 4.
inline double transport_tree_oracle(const GridMeasure& a, const GridMeasure& b) {
  const auto& A = a.atoms();
  const auto& B = b.atoms();
  int n = static_cast<int>(A.size());
  int m = static_cast<int>(B.size());
  int edges = n * m;
  int need = n + m - 1;
  double best = 1e300;

  std::vector<int> pick;
  std::vector<int> stack;
  // enumerate all edge subsets of size need
  std::vector<int> comb(need);
  for (int i = 0; i < need; ++i) comb[i] = i;
  auto advance = [&]() {
    int i = need - 1;
    while (i >= 0 && comb[i] == edges - need + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < need; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };

  do {
    // build adjacency; check spanning tree via union-find
    std::vector<int> parent(n + m);
    for (int i = 0; i < n + m; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    bool acyclic = true;
    for (int e : comb) {
      int u = e / m, v = n + e % m;
      int ru = find(u), rv = find(v);
      if (ru == rv) {
        acyclic = false;
        break;
      }
      parent[ru] = rv;
    }
    if (!acyclic) continue;

    // solve tree flow by leaf elimination
    std::vector<double> bal(n + m);
    for (int i = 0; i < n; ++i) bal[i] = A[i].w;
    for (int j = 0; j < m; ++j) bal[n + j] = -B[j].w;
    std::vector<std::vector<std::pair<int, int>>> adj(n + m);  // (neighbor, edge)
    for (int e : comb) {
      int u = e / m, v = n + e % m;
      adj[u].push_back({v, e});
      adj[v].push_back({u, e});
    }
    std::vector<int> deg(n + m);
    for (int v = 0; v < n + m; ++v) deg[v] = static_cast<int>(adj[v].size());
    std::vector<bool> done_edge(edges, false), done_node(n + m, false);
    std::vector<double> flow(edges, 0.0);
    std::vector<int> leaves;
    for (int v = 0; v < n + m; ++v)
      if (deg[v] == 1) leaves.push_back(v);
    bool feasible = true;
    int processed = 0;
    while (!leaves.empty()) {
      int v = leaves.back();
      leaves.pop_back();
      if (done_node[v]) continue;
      done_node[v] = true;
      ++processed;
      for (const auto& [u, e] : adj[v]) {
        if (done_edge[e]) continue;
        // edge carries v's remaining balance toward u (sign by direction)
        double f = v < n ? bal[v] : -bal[v];
        flow[e] = f;
        if (f < -1e-9) feasible = false;
        bal[u] += bal[v];
        bal[v] = 0;
        done_edge[e] = true;
        if (--deg[u] == 1) leaves.push_back(u);
        break;
      }
    }
    (void)processed;
    if (!feasible) continue;
    double cost = 0.0;
    for (int e : comb) cost += flow[e] * l1_dist(A[e / m], B[e % m]);
    best = std::min(best, cost);
  } while (advance());
  return best;
}

}  // namespace emdsketch::testing
