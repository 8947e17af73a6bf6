#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "emdsketch/common.hpp"

namespace emdsketch {

enum class MeasureKind { probability, general };

struct Atom {
  int x = 0;
  int y = 0;  // unused (0) when dims == 1
  double w = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

// Sparse nonnegative measure on the grid [delta)^dims, dims in {1, 2}.
// Atoms are kept sorted by (x, y) with strictly positive weights and distinct
// points; this canonical form makes equality, hashing and iteration order
// deterministic.
class GridMeasure {
 public:
  GridMeasure() = default;

  // Merges duplicate points, drops negligible weights, sorts, validates.
  static GridMeasure make(int delta, int dims, MeasureKind kind, std::vector<Atom> atoms);

  // Point mass of weight 1 (probability measure).
  static GridMeasure point_mass(int delta, int dims, int x, int y = 0);

  int delta() const { return delta_; }
  int dims() const { return dims_; }
  MeasureKind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }

  double total_mass() const;
  bool is_probability() const;

  // Scales all weights by c > 0; result is a general measure unless c keeps
  // the total at 1.
  GridMeasure scaled(double c) const;

  // Canonical text key: "x,y:w;..." with full precision weights. Used for
  // deterministic ordering and dedup hashing.
  std::string canonical_key() const;
  uint64_t hash() const;

  friend bool operator==(const GridMeasure& a, const GridMeasure& b) {
    return a.delta_ == b.delta_ && a.dims_ == b.dims_ && a.atoms_ == b.atoms_;
  }

 private:
  int delta_ = 1;
  int dims_ = 2;
  MeasureKind kind_ = MeasureKind::general;
  std::vector<Atom> atoms_;
};

// ell_1 ground distance between grid points.
inline int l1_dist(const Atom& a, const Atom& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Explicit flow between two measures; certificate for an EMD value.
struct TransportPlan {
  struct Edge {
    int sx, sy;   // source point
    int tx, ty;   // target point
    double mass;  // >= 0
  };
  std::vector<Edge> edges;
  double slack_source_mass = 0.0;  // mass of `a` left untransported
  double slack_target_mass = 0.0;  // mass of `b` left unfilled

  // Recomputes sum(mass * l1) + D * (slacks), D = dims * delta.
  double cost(int delta, int dims) const;
};

struct GranularitySpec {
  int64_t N = 1;  // weights must be multiples of 1/N
};

// -- measure file format ------------------------------------------------
//
//   emd-measure v1 delta=<D> dims=<1|2> kind=<probability|general>
//   x [y] weight
//
// One atom per line; duplicate points and out-of-range coordinates are
// rejected.
GridMeasure parse_measure(std::istream& in);
GridMeasure parse_measure_string(const std::string& text);
GridMeasure load_measure(const std::string& path);
std::string format_measure(const GridMeasure& m);
void save_measure(const GridMeasure& m, const std::string& path);

// Shortest-decimal formatting that round-trips doubles; all file formats and
// reports use it so reruns are byte-identical.
std::string format_double(double v);

}  // namespace emdsketch
