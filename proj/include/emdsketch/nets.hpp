#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emdsketch/measure.hpp"

namespace emdsketch {

struct BallCoverRequest {
  GridMeasure center;  // k-sparse probability measure
  double radius = 0.0;
  int k = 1;
};

// Knobs of the cover enumeration. Defaults are the construction's own
// constants (geometric ratio 1.01 over lengths and masses, nets at spacing
// l/100, mass floor R/(100*delta*k)). At those constants the literal
// four-loop enumeration is astronomically large even for k=1 on small grids,
// so materialization runs under `max_enumeration` with an auto-coarsening
// schedule, while coverage witnesses (see cover_witness) are built at any
// requested constants in O(k) per query.
struct CoverParams {
  double length_ratio = 1.01;
  double mass_ratio = 1.01;
  double net_denominator = 100.0;
  double mass_denominator = 100.0;
  uint64_t max_enumeration = 2'000'000;
  bool budget_prune = true;  // drop choice tuples whose rounded flow cost exceeds ratio*R

  static CoverParams paper_constants() { return CoverParams{}; }
  static CoverParams desk(uint64_t cap = 2'000'000) {
    CoverParams p;
    p.length_ratio = 2.0;
    p.mass_ratio = 1.3;
    p.net_denominator = 8.0;
    p.mass_denominator = 24.0;
    p.max_enumeration = cap;
    return p;
  }
};

// Lattice (r/denominator)-net of the ell_1 ball of radius r around a grid
// point, intersected with the grid.
std::vector<Atom> build_net(Atom center, double r, int delta, int dims, double denominator);

struct CoverResult {
  std::vector<GridMeasure> points;
  CoverParams effective;    // knobs actually used after auto-coarsening
  uint64_t enumerated = 0;  // choice tuples visited
  bool complete = true;     // false if the cap truncated the enumeration
};

// Enumerates centers of radius-(R/4) balls covering the EMD ball of k-sparse
// probability measures around req.center: edge multiplicities summing to at
// most 2k, geometric edge lengths, lattice endpoint nets, geometric masses
// with floor m0 = R/(mass_denominator*delta*k), assembled by moving the
// guessed masses and leaving remainders in place. Duplicate assemblies are
// pruned by a canonical atom hash.
CoverResult cover_ball(const BallCoverRequest& req, CoverParams params = CoverParams());

// log10 of the literal enumeration size at the given constants (composition
// sum of per-edge (length x net x mass) choice products; no pruning).
double cover_family_log10_size(const BallCoverRequest& req, const CoverParams& params);

// Constructive covering witness: rounds the optimal flow from req.center to
// nu through the same length/net/mass grids and returns the resulting family
// member. For nu inside the ball, EMD(nu, witness) is bounded by the
// enumeration's rounding budget (~0.06R at the default constants).
GridMeasure cover_witness(const BallCoverRequest& req, const CoverParams& params,
                          const GridMeasure& nu);

// Greedy r-separated subset: output is a subset of the input, pairwise EMD
// strictly greater than r, and every input point is within r of some output.
std::vector<GridMeasure> greedy_rnet(const std::vector<GridMeasure>& points, double r);

// Rounds each cover point to granularity 1/N (greedy weight rounding, then
// unit repairs to restore total mass), keeping it when the snapped measure
// stays within EMD r; points with no granular measure found are discarded.
// Covering radius doubles from r to 2r.
std::vector<GridMeasure> snap_to_granularity(const std::vector<GridMeasure>& cover,
                                             const GranularitySpec& g, double r);

// Projects a measure onto k-sparse measures: exact k-median over the
// coordinate product of its own support (which contains an optimal center
// set for ell_1 costs).
GridMeasure project_k_sparse(const GridMeasure& m, int k);

struct RegistryOptions {
  CoverParams cover = CoverParams::desk(60'000);
  bool use_cover_ball = true;
  double mesh_ratio = 0.2;  // fresh-candidate resolution, fraction of r_level
  double reach = 3.0;       // atom-move reach in units of r/weight
  int max_offsets_per_atom = 48;
  int max_fresh = 3000;
  int max_level_points = 4000;
  // Fresh candidates are regenerated at an anchor when r_level has shrunk by
  // this factor since its last refresh; 1 refreshes at every level.
  double refresh_factor = 1.0;
};

// Per-level r_i-separated net points with lazy expansion, r_i = 2*alpha^i*Lambda.
// Levels cascade: an expansion first imports nearby points from the level
// above (they are more than r_{i-1} > r_i apart), then inserts fresh local
// candidates under the separation constraint. When a candidate scores better
// than every conflicting incumbent (scores are the search's distance
// estimates), the incumbents are replaced, which keeps the best candidate of
// an expansion inside the net without breaching separation.
class NetRegistry {
 public:
  NetRegistry(GridMeasure y0, double Lambda, double alpha, int L, int k,
              RegistryOptions opts = {});

  double level_radius(int level) const;
  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  const std::vector<GridMeasure>& level_points(int level) const;
  int k() const { return k_; }

  // Expands (anchor, level) if not yet expanded and returns all level points
  // within `radius` of the anchor. `score` orders candidate insertion and
  // drives incumbent replacement; pass nullptr for canonical order.
  std::vector<GridMeasure> expand(int level, const GridMeasure& anchor, double radius,
                                  const std::function<double(const GridMeasure&)>* score);

  // Audit helper: true when every pair at `level` is separated by more than
  // level_radius(level) - tol.
  bool audit_separation(int level) const;

  uint64_t emd_evaluations() const { return emd_evals_; }
  uint64_t cover_calls() const { return cover_calls_; }

 private:
  struct Level {
    double r;
    std::vector<GridMeasure> points;
    std::vector<uint64_t> hashes;
  };

  std::vector<GridMeasure> fresh_candidates(const GridMeasure& anchor, double r, double radius);
  void insert_separated(int level, std::vector<GridMeasure> candidates,
                        const std::function<double(const GridMeasure&)>* score);

  int delta_, dims_, k_;
  RegistryOptions opts_;
  std::vector<Level> levels_;
  std::set<std::pair<int, uint64_t>> expanded_;
  std::map<uint64_t, double> last_refresh_r_;
  uint64_t emd_evals_ = 0;
  uint64_t cover_calls_ = 0;
};

// Spec'd free-function face of NetRegistry::expand.
inline std::vector<GridMeasure> expand_registry(NetRegistry& reg, int level,
                                                const GridMeasure& anchor, double radius) {
  return reg.expand(level, anchor, radius, nullptr);
}

// Test support: samples a measure inside the EMD ball B(center, R) by
// perturbing the center with at most 2k random mass moves of total cost <= R;
// membership holds by construction.
GridMeasure sample_in_ball(const GridMeasure& center, double R, int k, uint64_t seed);

// Rejection-sampled k-sparse measure inside B(center, R): perturb, project to
// k-sparse, retry until the projection stays in the ball. Falls back to the
// center itself if rejection keeps failing.
GridMeasure sample_in_ball_sparse(const GridMeasure& center, double R, int k, uint64_t seed);

}  // namespace emdsketch
