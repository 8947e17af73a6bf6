#include "emdsketch/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "emdsketch/calibration.hpp"
#include "emdsketch/exact.hpp"
#include "emdsketch/rng.hpp"
#include "json.hpp"

namespace emdsketch {

double RecoveryParams::level_radius(int i) const { return 2.0 * std::pow(alpha, i) * Lambda; }

RecoveryParams derive_params(double epsilon, double lambda, double Lambda, double K_quasi,
                             double D_eff) {
  require(epsilon > 0.0 && epsilon < 1.0 / 3.0, "derive_params: epsilon must lie in (0, 1/3)");
  require(lambda > 0.0, "derive_params: lambda must be positive");
  require(Lambda > 0.0, "derive_params: Lambda must be positive");
  require(K_quasi >= 1.0, "derive_params: K_quasi must be >= 1");
  require(D_eff >= 1.0, "derive_params: D_eff must be >= 1");

  RecoveryParams p;
  p.epsilon = epsilon;
  p.lambda = lambda;
  p.Lambda = Lambda;
  p.K_quasi = K_quasi;
  p.D_eff = D_eff;
  p.alpha = 1.0 - epsilon / 8.0;
  p.gamma = 8.0 * D_eff * K_quasi / epsilon;
  require(p.gamma > D_eff * K_quasi,
          "derive_params: infeasible, needs gamma > D*K (eps_condition denominator)");
  p.beta = K_quasi * K_quasi * (p.alpha + 2.0 * p.gamma) / p.alpha;
  double depth = std::log(2.0 * p.gamma * Lambda / lambda) / std::log(1.0 / p.alpha);
  p.L = std::max(0, static_cast<int>(std::ceil(depth - 1e-12)));

  const double tol = 1e-9;
  if (K_quasi * K_quasi * (p.alpha + 2.0 * p.gamma) > p.alpha * p.beta * (1.0 + tol))
    throw ContractViolation("derive_params: violated K^2(alpha + 2 gamma) <= alpha*beta");
  double lhs = D_eff * K_quasi * p.gamma / (p.alpha * (p.gamma - D_eff * K_quasi));
  if (lhs > (1.0 + epsilon) * D_eff * K_quasi * (1.0 + tol))
    throw ContractViolation(
        "derive_params: violated D*K*gamma/(alpha(gamma - D*K)) <= (1+eps)*D*K");
  if (2.0 * p.gamma * std::pow(p.alpha, p.L) * Lambda > lambda * (1.0 + 1e-6))
    throw ContractViolation("derive_params: violated 2*gamma*alpha^L*Lambda <= lambda");
  return p;
}

namespace {

std::string atoms_key(const GridMeasure& m) { return m.canonical_key(); }

}  // namespace

RecoveryResult search(const DistanceOracle& oracle, const GridMeasure& y0,
                      const RecoveryParams& params, NetRegistry& registry,
                      const SearchAudit* audit) {
  RecoveryResult res;
  res.params = params;

  // query cache: each distinct candidate is charged once
  std::map<uint64_t, double> qcache;
  uint64_t distinct = 0;
  auto q = [&](const GridMeasure& m) {
    uint64_t h = m.hash();
    auto it = qcache.find(h);
    if (it != qcache.end()) return it->second;
    ++distinct;
    double v = oracle(m);
    qcache.emplace(h, v);
    return v;
  };
  std::function<double(const GridMeasure&)> score = q;

  GridMeasure y_prev = y0;
  for (int i = 1; i <= params.L; ++i) {
    double r_i = params.level_radius(i);
    std::vector<GridMeasure> S = registry.expand(i, y_prev, params.beta * r_i, &score);
    if (audit) (*audit)(i, S, y_prev, r_i);
    if (S.empty()) {
      res.estimate = y_prev;
      res.terminated_at = i;
      res.degenerate_level = true;
      res.distinct_queries = distinct;
      return res;
    }
    // argmin with canonical tie-break
    std::size_t best = 0;
    double best_q = q(S[0]);
    for (std::size_t j = 1; j < S.size(); ++j) {
      double v = q(S[j]);
      if (v < best_q - 1e-15 ||
          (std::abs(v - best_q) <= 1e-15 && atoms_key(S[j]) < atoms_key(S[best]))) {
        best_q = v;
        best = j;
      }
    }
    res.trace.push_back({i, static_cast<int>(S.size()), r_i, best_q, atoms_key(S[best])});
    if (best_q > params.gamma * r_i) {
      res.estimate = y_prev;
      res.terminated_at = i;
      res.early_return = true;
      res.distinct_queries = distinct;
      return res;
    }
    y_prev = S[best];
  }
  res.estimate = y_prev;
  res.terminated_at = params.L + 1;
  res.distinct_queries = distinct;
  return res;
}

GridMeasure center_point_mass(int delta, int dims) {
  return GridMeasure::point_mass(delta, dims, delta / 2, dims == 2 ? delta / 2 : 0);
}

namespace {

RecoveryResult recover_common(const GridMeasure& x, int k, double epsilon, double lambda,
                              uint64_t seed, const RecoverConfig& config, PipelineBasis basis) {
  require(x.is_probability(), "recover: input must be a probability measure");
  require(k >= 1, "recover: k must be >= 1");
  int delta = x.delta();
  int dims = x.dims();

  EstimatorParams est;
  est.eps_c = config.eps_c;
  if (basis == PipelineBasis::cdf) {
    est.c_L = 1.0;
    est.d_eff = (1.0 + est.eps_c) / (1.0 - est.eps_c);
  } else {
    const CalEntry& cal = calibration_entry(delta, dims, config.calibration_path);
    est.c_L = cal.c_L;
    est.d_eff = effective_distortion(cal, est.eps_c);
  }

  RecoveryParams params = derive_params(epsilon, lambda, 2.0 * dims * delta, 1.0, est.d_eff);

  int m = config.m > 0 ? config.m : default_rows(config.eps_c);
  int R = config.R > 0 ? config.R : default_repetitions(config.query_budget);
  auto pipelines = make_pipelines(delta, dims, basis, R, m, 1, derive_seed(seed, /*module=*/2));
  AmplifiedSketch xs = sketch_measure(x, std::move(pipelines), est);

  GridMeasure y0 = center_point_mass(delta, dims);
  NetRegistry registry(y0, params.Lambda, params.alpha, params.L, k, config.registry);
  DistanceOracle oracle = [&](const GridMeasure& y) { return estimate_distance(xs, y); };
  RecoveryResult res = search(oracle, y0, params, registry);
  res.seed = seed;
  res.estimate = project_k_sparse(res.estimate, k);
  return res;
}

}  // namespace

RecoveryResult recover_square(const GridMeasure& x, int k, double epsilon, double lambda,
                              uint64_t seed, const RecoverConfig& config) {
  require(x.dims() == 2, "recover_square: 2-d measures only");
  return recover_common(x, k, epsilon, lambda, seed, config, PipelineBasis::grid);
}

RecoveryResult recover_interval(const GridMeasure& x, int k, double epsilon, double lambda,
                                uint64_t seed, const RecoverConfig& config) {
  require(x.dims() == 1, "recover_interval: 1-d measures only");
  return recover_common(x, k, epsilon, lambda, seed, config, PipelineBasis::cdf);
}

RecoveryResult recover_oracle(const GridMeasure& x, int k, double epsilon, double lambda,
                              const RegistryOptions* opts, const SearchAudit* audit) {
  require(x.is_probability(), "recover_oracle: input must be a probability measure");
  int delta = x.delta();
  int dims = x.dims();
  RecoveryParams params = derive_params(epsilon, lambda, 2.0 * dims * delta, 1.0, 1.0);
  GridMeasure y0 = center_point_mass(delta, dims);
  RegistryOptions ropts;
  ropts.refresh_factor = 1.0;
  if (opts) ropts = *opts;
  NetRegistry registry(y0, params.Lambda, params.alpha, params.L, k, ropts);
  DistanceOracle oracle = [&](const GridMeasure& y) { return emd_exact(x, y).cost; };
  RecoveryResult res = search(oracle, y0, params, registry, audit);
  res.estimate = project_k_sparse(res.estimate, k);
  return res;
}

std::string recovery_to_json(const RecoveryResult& r) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed"] = r.seed;
  j["terminated_at"] = r.terminated_at;
  j["early_return"] = r.early_return;
  j["degenerate_level"] = r.degenerate_level;
  j["distinct_queries"] = r.distinct_queries;
  j["params"] = {{"epsilon", r.params.epsilon}, {"lambda", r.params.lambda},
                 {"Lambda", r.params.Lambda},   {"K_quasi", r.params.K_quasi},
                 {"D_eff", r.params.D_eff},     {"alpha", r.params.alpha},
                 {"beta", r.params.beta},       {"gamma", r.params.gamma},
                 {"L", r.params.L}};
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : r.estimate.atoms()) atoms.push_back({a.x, a.y, a.w});
  j["estimate"] = {{"delta", r.estimate.delta()},
                   {"dims", r.estimate.dims()},
                   {"atoms", atoms}};
  nlohmann::json trace = nlohmann::json::array();
  for (const TraceRow& t : r.trace) {
    trace.push_back({{"level", t.level},
                     {"s_size", t.s_size},
                     {"r", t.r},
                     {"q_best", t.q_best},
                     {"y", t.y_key}});
  }
  j["trace"] = trace;
  return j.dump(2);
}

}  // namespace emdsketch
