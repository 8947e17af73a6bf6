#include "emdsketch/nets.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "emdsketch/exact.hpp"
#include "emdsketch/rng.hpp"

namespace emdsketch {

namespace {

std::vector<double> geometric_scale(double from, double ratio, double to) {
  std::vector<double> v;
  double x = from;
  while (x < to * (1.0 - 1e-12)) {
    v.push_back(x);
    x *= ratio;
  }
  v.push_back(to);
  return v;
}

// Mass grid {m0, ratio*m0, ...} capped at `cap`, cap included. Zero mass is
// the implicit skip choice and not stored.
std::vector<double> mass_grid(double m0, double ratio, double cap) {
  if (m0 > cap) return {cap};
  return geometric_scale(m0, ratio, cap);
}

double round_down_to_grid(double m, const std::vector<double>& grid) {
  // grid sorted ascending; returns 0 when below the floor
  double best = 0.0;
  for (double g : grid) {
    if (g <= m * (1.0 + 1e-12)) best = g;
    else break;
  }
  return best;
}

// centroid displacement lower-bounds EMD for equal-mass measures
double emd_lower_bound(const GridMeasure& a, const GridMeasure& b) {
  double ax = 0, ay = 0, bx = 0, by = 0, ma = 0, mb = 0;
  for (const Atom& t : a.atoms()) ax += t.w * t.x, ay += t.w * t.y, ma += t.w;
  for (const Atom& t : b.atoms()) bx += t.w * t.x, by += t.w * t.y, mb += t.w;
  if (std::abs(ma - mb) > kMassTol) return 0.0;  // penalty form; don't bother
  return std::abs(ax - bx) + std::abs(ay - by);
}

}  // namespace

std::vector<Atom> build_net(Atom center, double r, int delta, int dims, double denominator) {
  int spacing = std::max<int>(1, static_cast<int>(std::llround(r / denominator)));
  int reach = static_cast<int>(std::floor(r + 1e-9));
  std::vector<Atom> out;
  for (int dx = -((reach / spacing) * spacing); dx <= reach; dx += spacing) {
    int x = center.x + dx;
    if (x < 0 || x >= delta) continue;
    if (dims == 1) {
      if (std::abs(dx) <= reach) out.push_back({x, 0, 0.0});
      continue;
    }
    int ybudget = reach - std::abs(dx);
    for (int dy = -((ybudget / spacing) * spacing); dy <= ybudget; dy += spacing) {
      int y = center.y + dy;
      if (y < 0 || y >= delta) continue;
      out.push_back({x, y, 0.0});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Atom& a, const Atom& b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
  return out;
}

namespace {

struct EdgeChoice {
  Atom target;
  double min_len;  // smallest length-grid value whose net contains the target
};

// Distinct (target, min length) choices for edges out of one source point.
std::vector<EdgeChoice> edge_choices(Atom source, const std::vector<double>& lengths, int delta,
                                     int dims, double net_denominator) {
  std::map<std::pair<int, int>, double> min_len;
  for (double l : lengths) {
    for (const Atom& p : build_net(source, l, delta, dims, net_denominator)) {
      if (p.x == source.x && p.y == source.y) continue;  // zero move == skip
      auto key = std::make_pair(p.x, p.y);
      auto it = min_len.find(key);
      if (it == min_len.end()) min_len.emplace(key, l);
    }
  }
  std::vector<EdgeChoice> out;
  out.reserve(min_len.size());
  for (const auto& [pt, l] : min_len) out.push_back({{pt.first, pt.second, 0.0}, l});
  return out;
}

// Enumerate c : supp -> Z_{>0} with sum <= 2k.
void compositions(int nsrc, int budget, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == nsrc) {
    out.push_back(cur);
    return;
  }
  int remaining_min = nsrc - static_cast<int>(cur.size()) - 1;  // later sources need >= 1 each
  for (int c = 1; c + remaining_min <= budget; ++c) {
    cur.push_back(c);
    compositions(nsrc, budget - c, cur, out);
    cur.pop_back();
  }
}

GridMeasure assemble(const GridMeasure& mu, const std::vector<std::pair<int, Atom>>& moves,
                     const std::vector<double>& masses) {
  // moves[i] = (source index, target); masses aligned
  std::vector<Atom> atoms;
  std::vector<double> leftover;
  for (const Atom& a : mu.atoms()) leftover.push_back(a.w);
  for (std::size_t i = 0; i < moves.size(); ++i) {
    leftover[moves[i].first] -= masses[i];
    atoms.push_back({moves[i].second.x, moves[i].second.y, masses[i]});
  }
  const auto& src = mu.atoms();
  for (std::size_t j = 0; j < src.size(); ++j) {
    double w = std::max(0.0, leftover[j]);
    if (w > 1e-12) atoms.push_back({src[j].x, src[j].y, w});
  }
  return GridMeasure::make(mu.delta(), mu.dims(), MeasureKind::probability, std::move(atoms));
}

struct Enumerator {
  const GridMeasure& mu;
  double R;
  CoverParams params;
  std::vector<std::vector<EdgeChoice>> choices;  // per source
  std::vector<double> mgrid;
  std::vector<GridMeasure>* out;
  std::unordered_set<uint64_t> seen;
  uint64_t visited = 0;
  bool truncated = false;

  // current DFS state
  const std::vector<int>* comp = nullptr;
  std::vector<std::pair<int, Atom>> moves;
  std::vector<double> masses;
  std::vector<double> used_mass;  // per source

  void emit() {
    GridMeasure m = assemble(mu, moves, masses);
    if (seen.insert(m.hash()).second) out->push_back(std::move(m));
  }

  // edges flattened over sources; per-source edges take nondecreasing
  // (choice, mass) index pairs since they are exchangeable
  void dfs(int src, int edge_in_src, int min_choice, int min_mass, double budget) {
    if (truncated) return;
    if (++visited > params.max_enumeration) {
      truncated = true;
      return;
    }
    if (src == static_cast<int>(choices.size())) {
      emit();
      return;
    }
    int edges_here = (*comp)[src];
    if (edge_in_src == edges_here) {
      dfs(src + 1, 0, 0, 0, budget);
      return;
    }
    // skip choice: this edge and all remaining edges of the source carry 0
    dfs(src + 1, 0, 0, 0, budget);
    const auto& ec = choices[src];
    double cap_mass = mu.atoms()[src].w;
    for (int ci = min_choice; ci < static_cast<int>(ec.size()); ++ci) {
      for (int mi = (ci == min_choice ? min_mass : 0); mi < static_cast<int>(mgrid.size()); ++mi) {
        double m = mgrid[mi];
        if (used_mass[src] + m > cap_mass * (1.0 + 1e-12)) break;
        double c = m * ec[ci].min_len;
        if (params.budget_prune && c > budget + 1e-12) break;
        moves.push_back({src, ec[ci].target});
        masses.push_back(m);
        used_mass[src] += m;
        dfs(src, edge_in_src + 1, ci, mi, budget - c);
        used_mass[src] -= m;
        masses.pop_back();
        moves.pop_back();
        if (truncated) return;
      }
    }
  }
};

CoverParams coarsen(CoverParams p) {
  p.length_ratio = std::min(4.0, 1.0 + 2.0 * (p.length_ratio - 1.0));
  p.mass_ratio = std::min(4.0, 1.0 + 2.0 * (p.mass_ratio - 1.0));
  p.net_denominator = std::max(1.0, p.net_denominator / 2.0);
  p.mass_denominator = std::max(2.0, p.mass_denominator / 2.0);
  return p;
}

bool params_equal(const CoverParams& a, const CoverParams& b) {
  return a.length_ratio == b.length_ratio && a.mass_ratio == b.mass_ratio &&
         a.net_denominator == b.net_denominator && a.mass_denominator == b.mass_denominator;
}

}  // namespace

CoverResult cover_ball(const BallCoverRequest& req, CoverParams params) {
  require(req.radius > 0.0, "cover_ball: radius must be positive");
  require(req.k >= 1, "cover_ball: k must be >= 1");
  require(static_cast<int>(req.center.support_size()) <= req.k,
          "cover_ball: center must be k-sparse");
  require(req.center.is_probability(), "cover_ball: center must be a probability measure");

  const GridMeasure& mu = req.center;
  int delta = mu.delta();
  int nsrc = static_cast<int>(mu.support_size());

  CoverParams p = params;
  for (;;) {
    std::vector<double> lengths = geometric_scale(1.0, p.length_ratio, 2.0 * delta);
    double m0 = req.radius / (p.mass_denominator * delta * req.k);
    double cap = std::min(1.0, req.radius);
    std::vector<double> mgrid = mass_grid(m0, p.mass_ratio, cap);

    Enumerator e{mu, req.radius, p, {}, mgrid, nullptr, {}, 0, false, nullptr, {}, {}, {}};
    e.choices.reserve(nsrc);
    for (const Atom& s : mu.atoms())
      e.choices.push_back(edge_choices(s, lengths, delta, mu.dims(), p.net_denominator));

    std::vector<GridMeasure> points;
    e.out = &points;
    e.used_mass.assign(nsrc, 0.0);

    std::vector<std::vector<int>> comps;
    {
      std::vector<int> cur;
      compositions(nsrc, 2 * req.k, cur, comps);
    }
    // Edge-count compositions only matter through the per-source maximum:
    // smaller counts are subsumed by zero-mass skips. Enumerate the maximal
    // ones (sum == 2k) and dedup across them.
    for (const auto& c : comps) {
      int sum = 0;
      for (int v : c) sum += v;
      if (sum != 2 * req.k && comps.size() > 1) continue;
      e.comp = &c;
      e.dfs(0, 0, 0, 0, req.radius * p.length_ratio);
      if (e.truncated) break;
    }

    if (!e.truncated) {
      return CoverResult{std::move(points), p, e.visited, true};
    }
    CoverParams next = coarsen(p);
    if (params_equal(next, p)) {
      // coarsest knobs still over the cap: return the deterministic prefix
      return CoverResult{std::move(points), p, e.visited, false};
    }
    p = next;
  }
}

double cover_family_log10_size(const BallCoverRequest& req, const CoverParams& params) {
  const GridMeasure& mu = req.center;
  int delta = mu.delta();
  std::vector<double> lengths = geometric_scale(1.0, params.length_ratio, 2.0 * delta);
  double m0 = req.radius / (params.mass_denominator * delta * req.k);
  double cap = std::min(1.0, req.radius);
  std::size_t n_mass = mass_grid(m0, params.mass_ratio, cap).size() + 1;  // + zero

  // per-source factor: sum over lengths of |net| times mass choices
  std::vector<double> log_factor;
  for (const Atom& s : mu.atoms()) {
    double total = 0.0;
    for (double l : lengths)
      total += static_cast<double>(build_net(s, l, delta, mu.dims(), params.net_denominator).size());
    log_factor.push_back(std::log10(std::max(1.0, total * n_mass)));
  }

  std::vector<std::vector<int>> comps;
  {
    std::vector<int> cur;
    compositions(static_cast<int>(mu.support_size()), 2 * req.k, cur, comps);
  }
  double max_log = -1.0;
  std::vector<double> logs;
  for (const auto& c : comps) {
    double lg = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) lg += c[i] * log_factor[i];
    logs.push_back(lg);
    max_log = std::max(max_log, lg);
  }
  double sum = 0.0;
  for (double lg : logs) sum += std::pow(10.0, lg - max_log);
  return max_log + std::log10(sum);
}

GridMeasure cover_witness(const BallCoverRequest& req, const CoverParams& params,
                          const GridMeasure& nu) {
  require(nu.delta() == req.center.delta() && nu.dims() == req.center.dims(),
          "cover_witness: grid mismatch");
  const GridMeasure& mu = req.center;
  int delta = mu.delta();
  std::vector<double> lengths = geometric_scale(1.0, params.length_ratio, 2.0 * delta);
  double m0 = req.radius / (params.mass_denominator * delta * req.k);
  double cap = std::min(1.0, req.radius);
  std::vector<double> mgrid = mass_grid(m0, params.mass_ratio, cap);

  TransportPlan plan = emd_exact(mu, nu).plan;

  // source index lookup
  std::map<std::pair<int, int>, int> src_index;
  const auto& src = mu.atoms();
  for (std::size_t i = 0; i < src.size(); ++i) src_index[{src[i].x, src[i].y}] = static_cast<int>(i);

  std::vector<std::pair<int, Atom>> moves;
  std::vector<double> masses;
  for (const auto& e : plan.edges) {
    int dist = std::abs(e.sx - e.tx) + std::abs(e.sy - e.ty);
    if (dist == 0) continue;
    auto it = src_index.find({e.sx, e.sy});
    require(it != src_index.end(), "cover_witness: plan edge from outside the support");
    // smallest length-grid value >= the edge length
    double l = lengths.back();
    for (double cand : lengths) {
      if (cand >= dist - 1e-9) {
        l = cand;
        break;
      }
    }
    // snap the endpoint onto the lattice net around the source
    int spacing = std::max<int>(1, static_cast<int>(std::llround(l / params.net_denominator)));
    Atom s{e.sx, e.sy, 0.0};
    auto snap_axis = [&](int svalue, int qvalue) {
      int step = static_cast<int>(std::llround(static_cast<double>(qvalue - svalue) / spacing));
      return svalue + step * spacing;
    };
    Atom pnt{snap_axis(e.sx, e.tx), mu.dims() == 2 ? snap_axis(e.sy, e.ty) : 0, 0.0};
    auto dist_to_src = [&](const Atom& a) { return l1_dist(a, s); };
    auto in_grid = [&](const Atom& a) {
      return a.x >= 0 && a.x < delta && (mu.dims() == 1 || (a.y >= 0 && a.y < delta));
    };
    int reach = static_cast<int>(std::floor(l + 1e-9));
    while (!in_grid(pnt) || dist_to_src(pnt) > reach) {
      // step the farthest axis one lattice unit toward the source
      int ddx = pnt.x - s.x, ddy = pnt.y - s.y;
      if (std::abs(ddx) >= std::abs(ddy) && ddx != 0)
        pnt.x -= (ddx > 0 ? spacing : -spacing);
      else if (ddy != 0)
        pnt.y -= (ddy > 0 ? spacing : -spacing);
      else
        break;
    }
    if (pnt.x == s.x && pnt.y == s.y) continue;  // degenerated to a skip
    double m = round_down_to_grid(e.mass, mgrid);
    if (m <= 0.0) continue;
    moves.push_back({it->second, pnt});
    masses.push_back(m);
  }
  return assemble(mu, moves, masses);
}

std::vector<GridMeasure> greedy_rnet(const std::vector<GridMeasure>& points, double r) {
  require(r > 0.0, "greedy_rnet: r must be positive");
  std::vector<GridMeasure> kept;
  for (const GridMeasure& p : points) {
    bool covered = false;
    for (const GridMeasure& q : kept) {
      if (emd_lower_bound(p, q) > r + 1e-12) continue;
      if (emd_exact(p, q).cost <= r + 1e-12) {
        covered = true;
        break;
      }
    }
    if (!covered) kept.push_back(p);
  }
  return kept;
}

std::vector<GridMeasure> snap_to_granularity(const std::vector<GridMeasure>& cover,
                                             const GranularitySpec& g, double r) {
  require(g.N >= 1, "snap_to_granularity: N must be >= 1");
  std::vector<GridMeasure> out;
  for (const GridMeasure& m : cover) {
    const double unit = 1.0 / static_cast<double>(g.N);
    std::vector<Atom> atoms = m.atoms();
    std::vector<double> rounded(atoms.size());
    int64_t units = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      rounded[i] = std::round(atoms[i].w * g.N);
      units += static_cast<int64_t>(rounded[i]);
    }
    // repair to restore total mass 1 (N units): adjust atoms with the largest
    // rounding slack in the needed direction
    int64_t want = g.N;
    while (units != want) {
      int best = -1;
      double best_gap = -1e18;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        double gap = units < want ? atoms[i].w * g.N - rounded[i]
                                  : rounded[i] - atoms[i].w * g.N;
        if (units > want && rounded[i] < 1.0) continue;  // can't go below zero
        if (gap > best_gap) {
          best_gap = gap;
          best = static_cast<int>(i);
        }
      }
      if (best < 0) break;
      rounded[best] += units < want ? 1.0 : -1.0;
      units += units < want ? 1 : -1;
    }
    if (units != want) continue;  // no granular measure on this support
    std::vector<Atom> snapped;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (rounded[i] > 0.5) snapped.push_back({atoms[i].x, atoms[i].y, rounded[i] * unit});
    }
    if (snapped.empty()) continue;
    GridMeasure sm = GridMeasure::make(m.delta(), m.dims(), MeasureKind::probability,
                                       std::move(snapped));
    if (emd_exact(m, sm).cost <= r + kMassTol) out.push_back(std::move(sm));
  }
  return out;
}

GridMeasure project_k_sparse(const GridMeasure& m, int k) {
  if (static_cast<int>(m.support_size()) <= k) return m;
  // candidate centers: coordinate product of the support (contains an exact
  // k-median center set under ell_1)
  std::vector<int> xs, ys;
  for (const Atom& a : m.atoms()) xs.push_back(a.x), ys.push_back(a.y);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<Atom> cand;
  if (m.dims() == 2) {
    for (int x : xs)
      for (int y : ys) cand.push_back({x, y, 0.0});
  } else {
    for (int x : xs) cand.push_back({x, 0, 0.0});
  }
  return best_k_sparse(m, k, std::move(cand)).approx;
}

// ---------------------------------------------------------------------------
// NetRegistry

NetRegistry::NetRegistry(GridMeasure y0, double Lambda, double alpha, int L, int k,
                         RegistryOptions opts)
    : delta_(y0.delta()), dims_(y0.dims()), k_(k), opts_(opts) {
  require(L >= 0 && alpha > 0.0 && alpha < 1.0 && Lambda > 0.0, "registry: bad parameters");
  levels_.resize(L + 1);
  double r = 2.0 * Lambda;
  for (int i = 0; i <= L; ++i) {
    levels_[i].r = r * std::pow(alpha, i);
  }
  levels_[0].points.push_back(std::move(y0));
  levels_[0].hashes.push_back(levels_[0].points[0].hash());
}

double NetRegistry::level_radius(int level) const {
  require(level >= 0 && level < static_cast<int>(levels_.size()), "registry: level out of range");
  return levels_[level].r;
}

const std::vector<GridMeasure>& NetRegistry::level_points(int level) const {
  require(level >= 0 && level < static_cast<int>(levels_.size()), "registry: level out of range");
  return levels_[level].points;
}

std::vector<GridMeasure> NetRegistry::fresh_candidates(const GridMeasure& anchor, double r,
                                                       double radius) {
  std::vector<GridMeasure> out;
  const auto& atoms = anchor.atoms();
  int n = static_cast<int>(atoms.size());

  // single-atom moves on an integer offset lattice scaled to r / weight
  for (int j = 0; j < n; ++j) {
    double w = std::max(atoms[j].w, 1e-9);
    int spacing = std::max<int>(1, static_cast<int>(std::llround(opts_.mesh_ratio * r / w)));
    int reach = std::min<int>(2 * delta_,
                              std::max<int>(spacing, static_cast<int>(std::ceil(opts_.reach * r / w))));
    std::vector<std::pair<int, std::pair<int, int>>> offs;
    for (int dx = -(reach / spacing) * spacing; dx <= reach; dx += spacing) {
      if (dims_ == 1) {
        if (dx != 0 && std::abs(dx) <= reach) offs.push_back({std::abs(dx), {dx, 0}});
        continue;
      }
      int rem = reach - std::abs(dx);
      for (int dy = -(rem / spacing) * spacing; dy <= rem; dy += spacing) {
        if (dx == 0 && dy == 0) continue;
        offs.push_back({std::abs(dx) + std::abs(dy), {dx, dy}});
      }
    }
    std::sort(offs.begin(), offs.end());
    if (static_cast<int>(offs.size()) > opts_.max_offsets_per_atom)
      offs.resize(opts_.max_offsets_per_atom);
    for (const auto& [d, off] : offs) {
      int nx = atoms[j].x + off.first, ny = atoms[j].y + off.second;
      if (nx < 0 || nx >= delta_ || (dims_ == 2 && (ny < 0 || ny >= delta_))) continue;
      std::vector<Atom> na = atoms;
      na[j].x = nx;
      na[j].y = dims_ == 2 ? ny : 0;
      out.push_back(GridMeasure::make(delta_, dims_, MeasureKind::probability, std::move(na)));
    }
  }

  // weight transfers between atom pairs on a geometric amount grid
  if (n >= 2) {
    double gmin = std::max(1e-9, opts_.mesh_ratio * r / (4.0 * k_ * dims_ * delta_));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (double a = gmin; a < atoms[i].w * (1.0 + 1e-12); a *= 4.0) {
          double amount = std::min(a, atoms[i].w);
          std::vector<Atom> na = atoms;
          na[i].w -= amount;
          na[j].w += amount;
          if (na[i].w < 1e-12) na.erase(na.begin() + i);
          out.push_back(GridMeasure::make(delta_, dims_, MeasureKind::probability, std::move(na)));
          if (amount == atoms[i].w) break;
        }
      }
    }
  }

  // splits: free support slots get a fraction of the largest atom at dyadic
  // distances along the axes
  if (n < k_) {
    int jmax = 0;
    for (int j = 1; j < n; ++j)
      if (atoms[j].w > atoms[jmax].w) jmax = j;
    for (int dist = 1; dist <= delta_ / 2; dist *= 2) {
      const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (int d = 0; d < (dims_ == 2 ? 4 : 2); ++d) {
        int nx = atoms[jmax].x + dirs[d][0] * dist;
        int ny = dims_ == 2 ? atoms[jmax].y + dirs[d][1] * dist : 0;
        if (nx < 0 || nx >= delta_ || (dims_ == 2 && (ny < 0 || ny >= delta_))) continue;
        for (double frac : {0.5, 0.25}) {
          std::vector<Atom> na = atoms;
          double amount = atoms[jmax].w * frac;
          na[jmax].w -= amount;
          na.push_back({nx, ny, amount});
          out.push_back(GridMeasure::make(delta_, dims_, MeasureKind::probability, std::move(na)));
        }
      }
    }
  }

  // capped cover enumeration around the anchor
  if (opts_.use_cover_ball) {
    ++cover_calls_;
    BallCoverRequest req{project_k_sparse(anchor, k_), std::min(radius, 4.0 * dims_ * delta_), k_};
    if (req.radius > 0) {
      CoverResult cr = cover_ball(req, opts_.cover);
      for (GridMeasure& m : cr.points) out.push_back(std::move(m));
    }
  }

  if (static_cast<int>(out.size()) > opts_.max_fresh) out.resize(opts_.max_fresh);
  return out;
}

void NetRegistry::insert_separated(int level, std::vector<GridMeasure> candidates,
                                   const std::function<double(const GridMeasure&)>* score) {
  Level& lv = levels_[level];
  const double r = lv.r;

  // dedup against existing and within the batch
  std::unordered_set<uint64_t> seen(lv.hashes.begin(), lv.hashes.end());
  std::vector<GridMeasure> batch;
  for (GridMeasure& c : candidates) {
    if (seen.insert(c.hash()).second) batch.push_back(std::move(c));
  }
  if (score) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) order.push_back({(*score)(batch[i]), i});
    std::stable_sort(order.begin(), order.end(),
                     [&](const auto& a, const auto& b) {
                       if (a.first != b.first) return a.first < b.first;
                       return batch[a.second].canonical_key() < batch[b.second].canonical_key();
                     });
    std::vector<GridMeasure> sorted;
    sorted.reserve(batch.size());
    for (const auto& [s, i] : order) sorted.push_back(std::move(batch[i]));
    batch = std::move(sorted);
  }

  for (GridMeasure& cand : batch) {
    if (static_cast<int>(lv.points.size()) >= opts_.max_level_points) break;
    std::vector<std::size_t> conflicts;
    for (std::size_t i = 0; i < lv.points.size(); ++i) {
      if (emd_lower_bound(lv.points[i], cand) > r + 1e-12) continue;
      ++emd_evals_;
      if (emd_exact(lv.points[i], cand).cost <= r + 1e-12) conflicts.push_back(i);
    }
    if (conflicts.empty()) {
      lv.hashes.push_back(cand.hash());
      lv.points.push_back(std::move(cand));
      continue;
    }
    if (!score) continue;
    double cs = (*score)(cand);
    bool beats_all = true;
    for (std::size_t i : conflicts) {
      if ((*score)(lv.points[i]) <= cs) {
        beats_all = false;
        break;
      }
    }
    if (!beats_all) continue;
    // replace the conflicting incumbents with the better-scoring candidate
    for (auto it = conflicts.rbegin(); it != conflicts.rend(); ++it) {
      lv.points.erase(lv.points.begin() + *it);
      lv.hashes.erase(lv.hashes.begin() + *it);
    }
    lv.hashes.push_back(cand.hash());
    lv.points.push_back(std::move(cand));
  }
}

std::vector<GridMeasure> NetRegistry::expand(int level, const GridMeasure& anchor, double radius,
                                             const std::function<double(const GridMeasure&)>* score) {
  require(level >= 0 && level < static_cast<int>(levels_.size()),
          "expand_registry: level out of range");
  uint64_t ah = anchor.hash();
  if (level > 0 && !expanded_.count({level, ah})) {
    std::vector<GridMeasure> candidates;
    // cascade nearby points from the level above (already > r_{level-1} > r separated)
    for (const GridMeasure& p : levels_[level - 1].points) {
      if (emd_lower_bound(p, anchor) > radius) continue;
      ++emd_evals_;
      if (emd_exact(p, anchor).cost <= radius) candidates.push_back(p);
    }
    double r = levels_[level].r;
    auto it = last_refresh_r_.find(ah);
    bool refresh = it == last_refresh_r_.end() || r <= it->second / opts_.refresh_factor;
    if (refresh) {
      for (GridMeasure& m : fresh_candidates(anchor, r, radius)) {
        GridMeasure pm = project_k_sparse(std::move(m), k_);
        candidates.push_back(std::move(pm));
      }
      last_refresh_r_[ah] = r;
    }
    insert_separated(level, std::move(candidates), score);
    expanded_.insert({level, ah});
  }
  std::vector<GridMeasure> S;
  for (const GridMeasure& p : levels_[level].points) {
    if (emd_lower_bound(p, anchor) > radius) continue;
    ++emd_evals_;
    if (emd_exact(p, anchor).cost <= radius + 1e-12) S.push_back(p);
  }
  return S;
}

bool NetRegistry::audit_separation(int level) const {
  const Level& lv = levels_[level];
  for (std::size_t i = 0; i < lv.points.size(); ++i) {
    for (std::size_t j = i + 1; j < lv.points.size(); ++j) {
      if (emd_exact(lv.points[i], lv.points[j]).cost <= lv.r - kMassTol) return false;
    }
  }
  return true;
}

GridMeasure sample_in_ball(const GridMeasure& center, double R, int k, uint64_t seed) {
  Rng rng(derive_seed(seed, 0xba11));
  const auto& atoms = center.atoms();
  int moves = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(2 * k)));
  double budget = R * (0.2 + 0.75 * rng.uniform());
  std::vector<Atom> out = atoms;
  int delta = center.delta();
  for (int t = 0; t < moves && budget > 1e-9; ++t) {
    int src = static_cast<int>(rng.below(out.size()));
    double w = out[src].w;
    if (w < 1e-9) continue;
    int len = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, delta / 2))));
    double maxmass = std::min(w, budget / len);
    double mass = maxmass * (0.3 + 0.7 * rng.uniform());
    // random ell_1 direction
    int dx = 0, dy = 0;
    if (center.dims() == 1) {
      dx = rng.below(2) ? len : -len;
    } else {
      int split = static_cast<int>(rng.below(static_cast<uint64_t>(len + 1)));
      dx = rng.below(2) ? split : -split;
      dy = rng.below(2) ? (len - split) : -(len - split);
    }
    int nx = std::clamp(out[src].x + dx, 0, delta - 1);
    int ny = center.dims() == 2 ? std::clamp(out[src].y + dy, 0, delta - 1) : 0;
    int realdist = std::abs(nx - out[src].x) + std::abs(ny - out[src].y);
    if (realdist == 0) continue;
    out[src].w -= mass;
    out.push_back({nx, ny, mass});
    budget -= mass * realdist;
  }
  return GridMeasure::make(center.delta(), center.dims(), MeasureKind::probability,
                           std::move(out));
}

GridMeasure sample_in_ball_sparse(const GridMeasure& center, double R, int k, uint64_t seed) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    GridMeasure raw = sample_in_ball(center, R, k, derive_seed(seed, attempt));
    GridMeasure sparse = project_k_sparse(raw, k);
    if (emd_exact(center, sparse).cost <= R + kMassTol) return sparse;
  }
  return center;
}

}  // namespace emdsketch
