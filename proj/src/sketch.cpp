#include "emdsketch/sketch.hpp"

#include <algorithm>
#include <cmath>

#include "emdsketch/rng.hpp"
#include "json.hpp"

namespace emdsketch {

double CauchySketcher::entry(uint64_t row, uint64_t key) const {
  return cauchy_entry(seed, row, key);
}

SketchVector sketch(const EmbeddedVector& v, const CauchySketcher& sk) {
  SketchVector out;
  out.seed = sk.seed;
  out.m = sk.m;
  out.values.assign(sk.m, 0.0);
  // keys iterate in sorted order: fixed reduction order
  for (const auto& e : v.entries()) {
    for (int r = 0; r < sk.m; ++r) out.values[r] += sk.entry(r, e.key) * e.value;
  }
  return out;
}

SketchVector operator-(const SketchVector& a, const SketchVector& b) {
  require(a.seed == b.seed && a.m == b.m, "sketch subtraction: provenance mismatch");
  SketchVector r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
  return r;
}

double median_abs(std::vector<double> vals) {
  require(!vals.empty(), "median_estimate: empty vector");
  for (double& v : vals) v = std::abs(v);
  std::size_t n = vals.size();
  std::size_t mid = n / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  double hi = vals[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(vals.begin(), vals.begin() + mid);
  return 0.5 * (lo + hi);
}

double median_estimate(const SketchVector& sv) { return median_abs(sv.values); }

std::vector<SketchPipeline> make_pipelines(int delta, int dims, PipelineBasis basis, int R,
                                           int m, int t_param, uint64_t seed) {
  require(R >= 1, "make_pipelines: R must be >= 1");
  require(m >= 1, "make_pipelines: m must be >= 1");
  std::vector<SketchPipeline> out;
  out.reserve(R);
  for (int i = 0; i < R; ++i) {
    SketchPipeline p;
    p.basis = basis;
    uint64_t s = derive_seed(seed, /*module=*/1, /*pipeline=*/static_cast<uint64_t>(i));
    p.shift = sample_shift(delta, derive_seed(s, 1));
    p.coarse_seed = derive_seed(s, 2);
    p.t_param = t_param;
    p.cauchy = CauchySketcher{m, derive_seed(s, 3)};
    out.push_back(p);
  }
  return out;
}

namespace {

EmbeddedVector embed_for(const SketchPipeline& p, const GridMeasure& y,
                         const GridMeasure* minus) {
  if (p.basis == PipelineBasis::grid) return embed_grid(y, minus, p.shift);
  return embed_cdf(y, minus);
}

}  // namespace

AmplifiedSketch sketch_measure(const GridMeasure& x, std::vector<SketchPipeline> pipelines,
                               EstimatorParams params) {
  require(!pipelines.empty(), "sketch_measure: need at least one pipeline");
  AmplifiedSketch s;
  s.delta = x.delta();
  s.dims = x.dims();
  s.params = params;
  s.pipelines = std::move(pipelines);
  s.x_sketch.resize(s.pipelines.size());
  for (std::size_t i = 0; i < s.pipelines.size(); ++i) {
    const SketchPipeline& p = s.pipelines[i];
    if (p.basis == PipelineBasis::coarse) {
      s.x_for_coarse = x;
    } else {
      s.x_sketch[i] = sketch(embed_for(p, x, nullptr), p.cauchy);
    }
  }
  return s;
}

std::vector<double> estimate_distance_per_pipeline(const AmplifiedSketch& xs,
                                                   const GridMeasure& y) {
  require(y.delta() == xs.delta && y.dims() == xs.dims,
          "estimate_distance: candidate grid mismatch");
  std::vector<double> est(xs.pipelines.size());
  for (std::size_t i = 0; i < xs.pipelines.size(); ++i) {
    const SketchPipeline& p = xs.pipelines[i];
    if (p.basis == PipelineBasis::coarse) {
      require(xs.x_for_coarse.has_value(), "estimate_distance: provenance mismatch");
      CoarseEmbedding diff = embed_coarse(*xs.x_for_coarse, &y, p.t_param, p.coarse_seed);
      est[i] = coarse_norm(diff) / xs.params.c_L;
    } else {
      SketchVector ys = sketch(embed_for(p, y, nullptr), p.cauchy);
      require(ys.seed == xs.x_sketch[i].seed, "estimate_distance: provenance mismatch");
      double med = median_estimate(xs.x_sketch[i] - ys);
      double c_l = p.basis == PipelineBasis::cdf ? 1.0 : xs.params.c_L;
      est[i] = med / ((1.0 - xs.params.eps_c) * c_l);
    }
  }
  return est;
}

double estimate_distance(const AmplifiedSketch& xs, const GridMeasure& y) {
  return median_abs(estimate_distance_per_pipeline(xs, y));
}

std::string sketch_to_json(const AmplifiedSketch& s) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["delta"] = s.delta;
  j["dims"] = s.dims;
  j["R"] = s.pipelines.size();
  j["m"] = s.pipelines.empty() ? 0 : s.pipelines[0].cauchy.m;
  j["eps_c"] = s.params.eps_c;
  j["c_L"] = s.params.c_L;
  j["d_eff"] = s.params.d_eff;
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json shifts = nlohmann::json::array();
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json bases = nlohmann::json::array();
  for (std::size_t i = 0; i < s.pipelines.size(); ++i) {
    const auto& p = s.pipelines[i];
    seeds.push_back(p.cauchy.seed);
    shifts.push_back({p.shift.s1, p.shift.s2});
    bases.push_back(p.basis == PipelineBasis::grid ? "grid"
                    : p.basis == PipelineBasis::cdf ? "cdf"
                                                    : "coarse");
    values.push_back(s.x_sketch[i].values);
  }
  j["seeds"] = seeds;
  j["shift"] = shifts;
  j["basis"] = bases;
  j["values"] = values;
  return j.dump(2);
}

AmplifiedSketch sketch_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AmplifiedSketch s;
  s.delta = j.at("delta").get<int>();
  s.dims = j.at("dims").get<int>();
  s.params.eps_c = j.at("eps_c").get<double>();
  s.params.c_L = j.at("c_L").get<double>();
  s.params.d_eff = j.at("d_eff").get<double>();
  int m = j.at("m").get<int>();
  std::size_t R = j.at("R").get<std::size_t>();
  for (std::size_t i = 0; i < R; ++i) {
    SketchPipeline p;
    std::string basis = j.at("basis")[i].get<std::string>();
    p.basis = basis == "grid" ? PipelineBasis::grid
              : basis == "cdf" ? PipelineBasis::cdf
                               : PipelineBasis::coarse;
    p.shift.s1 = j.at("shift")[i][0].get<int>();
    p.shift.s2 = j.at("shift")[i][1].get<int>();
    p.cauchy = CauchySketcher{m, j.at("seeds")[i].get<uint64_t>()};
    s.pipelines.push_back(p);
    SketchVector sv;
    sv.m = m;
    sv.seed = p.cauchy.seed;
    sv.values = j.at("values")[i].get<std::vector<double>>();
    s.x_sketch.push_back(std::move(sv));
  }
  return s;
}

}  // namespace emdsketch
