#include "emdsketch/packing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "emdsketch/exact.hpp"
#include "emdsketch/rng.hpp"

namespace emdsketch {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

double PackingFamily::family_cardinality() const {
  return std::pow(static_cast<double>(log_u + 1), pairs);
}

GridMeasure PackingFamily::B(const std::vector<int>& index_tuple) const {
  require(static_cast<int>(index_tuple.size()) == pairs, "packing: index tuple size mismatch");
  std::vector<Atom> atoms;
  for (int j = 0; j < pairs; ++j) {
    int ij = index_tuple[j];
    require(ij >= 0 && ij <= log_u, "packing: index out of range");
    double light = std::pow(2.0, -ij);
    int offset = 1 << ij;
    atoms.push_back({anchors[j].x, anchors[j].y, 2.0 - light});
    atoms.push_back({anchors[j].x + offset, anchors[j].y, light});
  }
  return GridMeasure::make(delta, dims, MeasureKind::general, std::move(atoms));
}

std::vector<int> PackingFamily::sample_index(uint64_t seed) const {
  Rng rng(derive_seed(seed, 0xb1));
  std::vector<int> idx(pairs);
  for (int j = 0; j < pairs; ++j)
    idx[j] = static_cast<int>(rng.below(static_cast<uint64_t>(log_u + 1)));
  return idx;
}

PackingFamily gen_packing_1d(int k, int delta) {
  require(k > 1 && k % 2 == 0, "gen_packing_1d: k must be even and > 1");
  require(is_pow2(delta), "gen_packing_1d: delta must be a power of two");
  require(k <= delta, "gen_packing_1d: k must be <= delta");

  PackingFamily f;
  f.k = k;
  f.delta = delta;
  f.dims = 1;
  f.pairs = k / 2;
  int U = delta / k;
  f.log_u = std::max(0, ilog2(U));
  f.expected_distance = k / 2.0;
  std::vector<Atom> atoms;
  for (int j = 0; j < f.pairs; ++j) {
    int x = 2 * j * delta / k;  // spacing 2*delta/k, offsets stay below it
    f.anchors.push_back({x, 0, 2.0});
    atoms.push_back({x, 0, 2.0});
  }
  f.A = GridMeasure::make(delta, 1, MeasureKind::general, std::move(atoms));
  return f;
}

PackingFamily gen_packing_2d(int k, int delta) {
  require(k >= 4, "gen_packing_2d: k must be >= 4");
  int root = static_cast<int>(std::llround(std::sqrt(static_cast<double>(k))));
  require(root * root == k && is_pow2(root), "gen_packing_2d: k must be a power of four");
  require(is_pow2(delta), "gen_packing_2d: delta must be a power of two");
  require(root <= delta, "gen_packing_2d: sqrt(k) must be <= delta");

  PackingFamily f;
  f.k = k;
  f.delta = delta;
  f.dims = 2;
  f.pairs = k / 4;
  int rows = root / 2;
  int per_row = root / 2;
  int pitch = 2 * delta / root;  // row separation and in-row spacing
  int U = delta / root;
  f.log_u = std::max(0, ilog2(U));
  f.expected_distance = k / 4.0;
  std::vector<Atom> atoms;
  for (int row = 0; row < rows; ++row) {
    for (int mcol = 0; mcol < per_row; ++mcol) {
      int x = mcol * pitch;
      int y = row * pitch;
      f.anchors.push_back({x, y, 2.0});
      atoms.push_back({x, y, 2.0});
    }
  }
  f.A = GridMeasure::make(delta, 2, MeasureKind::general, std::move(atoms));
  return f;
}

ProbeResult doubling_probe(const PackingFamily& family, double r_big, double r_small,
                           int samples, uint64_t seed) {
  require(samples >= 1, "doubling_probe: need at least one sample");
  ProbeResult res;
  res.sampled = samples;

  double total = family.A.total_mass();
  auto normalized_emd = [&](const GridMeasure& a, const GridMeasure& b) {
    // probe distances run at probability scale, then rescale back
    return emd_exact(a.scaled(1.0 / total), b.scaled(1.0 / total)).cost * total;
  };

  std::set<std::vector<int>> seen;
  std::vector<GridMeasure> in_ball;
  for (int s = 0; s < samples; ++s) {
    std::vector<int> idx = family.sample_index(derive_seed(seed, s));
    if (!seen.insert(idx).second) continue;  // duplicates deduplicated
    GridMeasure b = family.B(idx);
    if (normalized_emd(family.A, b) <= r_big + kMassTol) in_ball.push_back(std::move(b));
  }
  res.distinct = static_cast<int>(seen.size());
  res.in_ball = static_cast<int>(in_ball.size());

  std::vector<GridMeasure> kept;
  for (const GridMeasure& b : in_ball) {
    bool close = false;
    for (const GridMeasure& c : kept) {
      if (normalized_emd(b, c) <= r_small + kMassTol) {
        close = true;
        break;
      }
    }
    if (!close) kept.push_back(b);
  }
  res.separated = static_cast<int>(kept.size());
  res.lb_dimension = res.separated > 0 ? std::log2(static_cast<double>(res.separated)) : 0.0;
  return res;
}

}  // namespace emdsketch
