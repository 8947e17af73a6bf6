#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emdsketch/measure.hpp"
#include "emdsketch/nets.hpp"
#include "emdsketch/sketch.hpp"

namespace emdsketch {

// Parameters of the navigating-net search. alpha, beta, gamma and L follow
// from (epsilon, lambda, Lambda, K_quasi, D_eff); derive_params verifies the
// three feasibility inequalities and rejects infeasible inputs naming the
// violated one.
struct RecoveryParams {
  double epsilon = 0.25;
  double lambda = 1.0;
  double Lambda = 1.0;
  double K_quasi = 1.0;
  double D_eff = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int L = 0;

  double level_radius(int i) const;  // r_i = 2 * alpha^i * Lambda
};

RecoveryParams derive_params(double epsilon, double lambda, double Lambda, double K_quasi,
                             double D_eff);

struct TraceRow {
  int level = 0;
  int s_size = 0;
  double r = 0.0;
  double q_best = 0.0;
  std::string y_key;  // canonical atoms of the chosen y_i
};

struct RecoveryResult {
  GridMeasure estimate;
  std::vector<TraceRow> trace;
  // L+1 for a full-depth return of y_L; otherwise the level whose check
  // returned y_{level-1}.
  int terminated_at = 0;
  bool early_return = false;
  bool degenerate_level = false;  // an empty S_i forced the return
  uint64_t distinct_queries = 0;
  uint64_t seed = 0;
  RecoveryParams params;
};

std::string recovery_to_json(const RecoveryResult& r);

// Distance oracle abstraction: the sketch-backed estimator in production,
// exact EMD as a test hook (the probabilistic analysis separates cleanly
// from the net/search logic). Queries are cached per candidate, so
// distinct_queries counts unique net points examined.
using DistanceOracle = std::function<double(const GridMeasure&)>;

// Per-level audit callback: (level, S_i, y_{i-1}, r_i). Used by tests to
// check the net-coverage claims along the trace.
using SearchAudit = std::function<void(int, const std::vector<GridMeasure>&, const GridMeasure&,
                                       double)>;

// The top-down search over the lazy net registry: at level i the candidate
// set is S_i = N_i within beta*r_i of y_{i-1}; y_i minimizes the oracle (ties
// broken by canonical atom encoding); q(y_i) > gamma*r_i returns y_{i-1}.
RecoveryResult search(const DistanceOracle& oracle, const GridMeasure& y0,
                      const RecoveryParams& params, NetRegistry& registry,
                      const SearchAudit* audit = nullptr);

struct RecoverConfig {
  double eps_c = 0.1;
  int m = 512;              // sketch rows per pipeline (0 = 400/eps_c^2)
  int R = 0;                // pipelines (0 = 2*ceil(log2(query_budget)) + 1)
  uint64_t query_budget = 4096;
  std::string calibration_path;  // empty = env var / on-demand
  RegistryOptions registry;
  RecoverConfig() { registry.refresh_factor = 2.0; }
};

// End-to-end pipelines: sketch x, derive parameters (K = 1; D_eff from the
// calibrated grid-embedding distortion, or the near-isometric CDF bound in
// one dimension), then search from the grid-center point mass with
// Lambda = 2 * dims * delta.
RecoveryResult recover_square(const GridMeasure& x, int k, double epsilon, double lambda,
                              uint64_t seed, const RecoverConfig& config = RecoverConfig());
RecoveryResult recover_interval(const GridMeasure& x, int k, double epsilon, double lambda,
                                uint64_t seed, const RecoverConfig& config = RecoverConfig());

// Oracle-mode pipeline (test hook): q is exact EMD to x, D_eff = 1, and the
// registry refreshes at every level.
RecoveryResult recover_oracle(const GridMeasure& x, int k, double epsilon, double lambda,
                              const RegistryOptions* opts = nullptr,
                              const SearchAudit* audit = nullptr);

GridMeasure center_point_mass(int delta, int dims);

}  // namespace emdsketch
