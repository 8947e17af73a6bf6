#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emdsketch/embed.hpp"
#include "emdsketch/measure.hpp"

namespace emdsketch {

// Implicit m x n matrix of i.i.d. standard Cauchy entries (scale 1).
// Entries are a deterministic function of (seed, row, column key), so
// sketches of different vectors taken with the same sketcher are comparable
// and the matrix is never materialized.
struct CauchySketcher {
  int m = 0;
  uint64_t seed = 0;

  double entry(uint64_t row, uint64_t key) const;
};

struct SketchVector {
  std::vector<double> values;
  uint64_t seed = 0;  // provenance
  int m = 0;

  friend SketchVector operator-(const SketchVector& a, const SketchVector& b);
};

SketchVector sketch(const EmbeddedVector& v, const CauchySketcher& sk);

// Median of absolute coordinates; estimates the ell_1 norm of the pre-image.
// Even length takes the mean of the two middle order statistics.
double median_estimate(const SketchVector& sv);
double median_abs(std::vector<double> values);

// One seeded (embedding, Cauchy matrix) pair. `basis` selects the inner
// embedding: the shifted grid embedding by default, the exact 1-d CDF
// embedding for interval instances, or the coarse block decomposition whose
// component EMD values are evaluated exactly.
enum class PipelineBasis : uint8_t { grid, cdf, coarse };

struct SketchPipeline {
  PipelineBasis basis = PipelineBasis::grid;
  GridShift shift;        // grid basis
  uint64_t coarse_seed = 0;  // coarse basis
  int t_param = 1;           // coarse basis
  CauchySketcher cauchy;
};

struct EstimatorParams {
  double eps_c = 0.1;   // Cauchy estimator accuracy
  double c_L = 1.0;     // calibrated deterministic lower-bound constant
  double d_eff = 1.0;   // calibrated distortion of the full estimator
};

// Default sketch width for a given estimator accuracy.
inline int default_rows(double eps_c) {
  return static_cast<int>(std::max(1.0, std::ceil(400.0 / (eps_c * eps_c))));
}

inline int default_repetitions(uint64_t query_budget) {
  int log2n = 0;
  while ((uint64_t{1} << log2n) < query_budget) ++log2n;
  return 2 * log2n + 1;
}

// Sketch of a fixed measure x under R independent pipelines. The recovery
// procedure only sees this object; candidate measures are embedded and
// sketched on demand with the same seeds.
struct AmplifiedSketch {
  int delta = 0;
  int dims = 2;
  std::vector<SketchPipeline> pipelines;
  std::vector<SketchVector> x_sketch;  // grid/cdf pipelines
  // Coarse pipelines keep the block decomposition of x whole: the component
  // EMD instances stand in for the recursive small-instance sketches, and
  // their values are computed exactly at estimation time.
  std::optional<GridMeasure> x_for_coarse;
  EstimatorParams params;
};

std::vector<SketchPipeline> make_pipelines(int delta, int dims, PipelineBasis basis, int R,
                                           int m, int t_param, uint64_t seed);

AmplifiedSketch sketch_measure(const GridMeasure& x, std::vector<SketchPipeline> pipelines,
                               EstimatorParams params);

// Per-pipeline distance estimates against an explicit candidate y:
// median |S(x - y)| / ((1 - eps_c) * c_L). The returned estimate is the
// median over pipelines; with calibrated constants it satisfies
// EMD(x,y) <= E <= d_eff * EMD(x,y) with the amplified probability.
double estimate_distance(const AmplifiedSketch& xs, const GridMeasure& y);
std::vector<double> estimate_distance_per_pipeline(const AmplifiedSketch& xs,
                                                   const GridMeasure& y);

// JSON sketch file: {version, delta, dims, R, m, seeds[], shift[], values[][]}.
std::string sketch_to_json(const AmplifiedSketch& s);
AmplifiedSketch sketch_from_json(const std::string& text);

}  // namespace emdsketch
