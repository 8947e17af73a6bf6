#include "emdsketch/embed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "emdsketch/exact.hpp"
#include "emdsketch/rng.hpp"

namespace emdsketch {

namespace {

inline int floor_div(int a, int b) {
  int q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

EmbeddedVector::EmbeddedVector(EmbedBasis basis, std::vector<Entry> entries)
    : basis_(basis), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.key < b.key; });
}

double EmbeddedVector::l1_norm() const {
  double s = 0.0;
  for (const Entry& e : entries_) s += std::abs(e.value);
  return s;
}

EmbeddedVector operator-(const EmbeddedVector& a, const EmbeddedVector& b) {
  require(a.basis_ == b.basis_, "embedded vector subtraction: basis mismatch");
  std::vector<EmbeddedVector::Entry> out;
  out.reserve(a.entries_.size() + b.entries_.size());
  std::size_t i = 0, j = 0;
  while (i < a.entries_.size() || j < b.entries_.size()) {
    if (j == b.entries_.size() ||
        (i < a.entries_.size() && a.entries_[i].key < b.entries_[j].key)) {
      out.push_back(a.entries_[i++]);
    } else if (i == a.entries_.size() || b.entries_[j].key < a.entries_[i].key) {
      out.push_back({b.entries_[j].key, -b.entries_[j].value});
      ++j;
    } else {
      double v = a.entries_[i].value - b.entries_[j].value;
      if (v != 0.0) out.push_back({a.entries_[i].key, v});
      ++i, ++j;
    }
  }
  EmbeddedVector r;
  r.basis_ = a.basis_;
  r.entries_ = std::move(out);
  return r;
}

uint64_t EmbeddedVector::pack_key(int level, int cx, int cy) {
  // zig-zag cell indices (they can be negative under shifts)
  auto zz = [](int v) -> uint64_t {
    return (static_cast<uint64_t>(static_cast<uint32_t>(v)) << 1) ^ (v < 0 ? ~0u : 0u);
  };
  return (static_cast<uint64_t>(level & 0xff) << 56) | ((zz(cx) & 0xfffffff) << 28) |
         (zz(cy) & 0xfffffff);
}

void EmbeddedVector::unpack_key(uint64_t key, int& level, int& cx, int& cy) {
  level = static_cast<int>(key >> 56);
  auto unzz = [](uint64_t v) -> int {
    uint32_t u = static_cast<uint32_t>(v & 0xfffffff);
    return static_cast<int>((u >> 1) ^ (~(u & 1) + 1));
  };
  cx = unzz(key >> 28);
  cy = unzz(key);
}

EmbeddedVector embed_grid(const GridMeasure& x, const GridMeasure* minus, GridShift shift) {
  require(minus == nullptr || (minus->delta() == x.delta() && minus->dims() == x.dims()),
          "embed_grid: measure mismatch");
  int delta_pad = next_pow2(x.delta());
  int l = ilog2(delta_pad);
  require(shift.s1 >= 0 && shift.s1 < delta_pad && (x.dims() == 1 || (shift.s2 >= 0 && shift.s2 < delta_pad)),
          "embed_grid: shift out of range");

  std::map<uint64_t, double> acc;
  auto add = [&](const GridMeasure& m, double sign) {
    for (const Atom& a : m.atoms()) {
      for (int t = 0; t <= l; ++t) {
        int side = 1 << t;
        int cx = floor_div(a.x - shift.s1, side);
        int cy = x.dims() == 2 ? floor_div(a.y - shift.s2, side) : 0;
        acc[EmbeddedVector::pack_key(t, cx, cy)] += sign * a.w * side;
      }
    }
  };
  add(x, 1.0);
  if (minus) add(*minus, -1.0);

  std::vector<EmbeddedVector::Entry> entries;
  entries.reserve(acc.size());
  double scale = std::max(1.0, x.total_mass());
  for (const auto& [k, v] : acc) {
    if (std::abs(v) > 1e-12 * scale) entries.push_back({k, v});
  }
  return EmbeddedVector(EmbedBasis::grid, std::move(entries));
}

EmbeddedVector embed_cdf(const GridMeasure& x, const GridMeasure* minus) {
  require(x.dims() == 1, "embed_cdf: 1-d measures only");
  require(minus == nullptr || (minus->dims() == 1 && minus->delta() == x.delta()),
          "embed_cdf: measure mismatch");
  std::vector<double> f(x.delta(), 0.0);
  for (const Atom& a : x.atoms()) f[a.x] += a.w;
  if (minus) {
    for (const Atom& a : minus->atoms()) f[a.x] -= a.w;
  }
  std::vector<EmbeddedVector::Entry> entries;
  double run = 0.0;
  for (int i = 0; i < x.delta(); ++i) {
    run += f[i];
    if (run != 0.0) entries.push_back({EmbeddedVector::pack_key(0, i, 0), run});
  }
  return EmbeddedVector(EmbedBasis::cdf, std::move(entries));
}

GridShift sample_shift(int delta, uint64_t seed) {
  int delta_pad = next_pow2(delta);
  Rng rng(derive_seed(seed, 0x5f17));
  GridShift s;
  s.s1 = static_cast<int>(rng.below(static_cast<uint64_t>(delta_pad)));
  s.s2 = static_cast<int>(rng.below(static_cast<uint64_t>(delta_pad)));
  return s;
}

namespace {

struct SignedAtom {
  int x, y;
  double w;  // signed
};

// Recursively splits a block into 2^t x 2^t cells, emitting the cell-mass
// instance at each internal node and signed leaf measures at blocks of side
// <= 2^t. Coordinates entering a child block are re-based to its origin.
void coarse_recurse(std::vector<SignedAtom> atoms, int side, int dims, int t,
                    double dist_scale, std::vector<CoarseComponent>& out) {
  if (atoms.empty()) return;
  if (side <= (1 << t)) {
    CoarseComponent leaf;
    leaf.scale = dist_scale;
    leaf.side = side;
    leaf.top_level = false;
    for (const SignedAtom& a : atoms) {
      if (a.w > 0)
        leaf.pos.push_back({a.x, a.y, a.w});
      else if (a.w < 0)
        leaf.neg.push_back({a.x, a.y, -a.w});
    }
    if (!leaf.pos.empty() || !leaf.neg.empty()) out.push_back(std::move(leaf));
    return;
  }
  int cell = side >> t;  // side / 2^t
  std::map<std::pair<int, int>, std::vector<SignedAtom>> cells;
  std::map<std::pair<int, int>, double> cell_mass;
  for (const SignedAtom& a : atoms) {
    int cx = a.x / cell;
    int cy = dims == 2 ? a.y / cell : 0;
    cells[{cx, cy}].push_back({a.x - cx * cell, a.y - cy * cell, a.w});
    cell_mass[{cx, cy}] += a.w;
  }
  CoarseComponent top;
  top.scale = dist_scale * cell;
  top.side = 1 << t;
  top.top_level = true;
  for (const auto& [c, w] : cell_mass) {
    if (w > 1e-12)
      top.pos.push_back({c.first, c.second, w});
    else if (w < -1e-12)
      top.neg.push_back({c.first, c.second, -w});
  }
  out.push_back(std::move(top));
  for (auto& [c, sub] : cells) coarse_recurse(std::move(sub), cell, dims, t, dist_scale, out);
}

}  // namespace

CoarseEmbedding embed_coarse(const GridMeasure& x, const GridMeasure* minus, int t_param,
                             uint64_t seed) {
  require(minus == nullptr || (minus->delta() == x.delta() && minus->dims() == x.dims()),
          "embed_coarse: measure mismatch");
  int delta_pad = next_pow2(x.delta());
  int l = ilog2(delta_pad);
  require(t_param >= 1 && t_param <= std::max(1, l), "embed_coarse: t_param out of [1, log2 delta]");

  CoarseEmbedding e;
  e.delta = x.delta();
  e.dims = x.dims();
  e.t_param = t_param;
  e.shift = sample_shift(x.delta(), seed);

  // The root grid is anchored at the sampled shift; shifted coordinates live
  // in [0, 2*delta_pad) so the root block has side 2*delta_pad and every
  // finer grid is a subdivision of it.
  std::vector<SignedAtom> atoms;
  auto push = [&](const GridMeasure& m, double sign) {
    for (const Atom& a : m.atoms()) {
      int sx = a.x - e.shift.s1 + delta_pad;
      int sy = x.dims() == 2 ? a.y - e.shift.s2 + delta_pad : 0;
      atoms.push_back({sx, sy, sign * a.w});
    }
  };
  push(x, 1.0);
  if (minus) push(*minus, -1.0);

  coarse_recurse(std::move(atoms), 2 * delta_pad, x.dims(), t_param, 1.0, e.components);
  return e;
}

double coarse_norm(const CoarseEmbedding& e) {
  double total = 0.0;
  for (const CoarseComponent& c : e.components) {
    if (c.pos.empty() && c.neg.empty()) continue;
    GridMeasure p = GridMeasure::make(c.side, e.dims, MeasureKind::general, c.pos);
    GridMeasure n = GridMeasure::make(c.side, e.dims, MeasureKind::general, c.neg);
    total += c.scale * emd_exact(p, n).cost;
  }
  return total;
}

}  // namespace emdsketch
