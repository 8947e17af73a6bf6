#include "emdsketch/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "emdsketch/calibration.hpp"
#include "emdsketch/embed.hpp"
#include "emdsketch/exact.hpp"
#include "emdsketch/measure.hpp"
#include "emdsketch/median_sketch.hpp"
#include "emdsketch/nets.hpp"
#include "emdsketch/packing.hpp"
#include "emdsketch/recovery.hpp"
#include "emdsketch/report.hpp"
#include "emdsketch/rng.hpp"
#include "emdsketch/sketch.hpp"

namespace emdsketch {

namespace {

GridMeasure random_probability(Rng& rng, int delta, int dims, int support) {
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

// k heavy centers plus a noise fraction spread over a few extra atoms
GridMeasure clustered_instance(Rng& rng, int delta, int dims, int k, double noise_fraction,
                               int noise_atoms) {
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) {
    Atom a;
    a.x = static_cast<int>(rng.below(delta));
    a.y = dims == 2 ? static_cast<int>(rng.below(delta)) : 0;
    a.w = (1.0 - noise_fraction) * (0.5 + rng.uniform());
    atoms.push_back(a);
  }
  double heavy = 0.0;
  for (const Atom& a : atoms) heavy += a.w;
  for (Atom& a : atoms) a.w *= (1.0 - noise_fraction) / heavy;
  for (int i = 0; i < noise_atoms; ++i) {
    Atom a;
    a.x = static_cast<int>(rng.below(delta));
    a.y = dims == 2 ? static_cast<int>(rng.below(delta)) : 0;
    a.w = noise_fraction / noise_atoms;
    atoms.push_back(a);
  }
  return GridMeasure::make(delta, dims, MeasureKind::probability, std::move(atoms));
}

struct Ctx {
  uint64_t seed;
  std::string out_dir;
};

using CriterionFn = void (*)(const Ctx&, CriterionResult&);

// ---- C1: CDF isometry ------------------------------------------------------
void c1_cdf_isometry(const Ctx& ctx, CriterionResult& r) {
  Rng rng(derive_seed(ctx.seed, 1));
  int ok = 0;
  const int trials = 200;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridMeasure a = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(12)));
    GridMeasure b = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(12)));
    double d1 = emd_cdf_1d(a, b);
    double d2 = emd_exact(a, b).cost;
    double gap = std::abs(d1 - d2);
    worst = std::max(worst, gap);
    if (gap <= 1e-9) ++ok;
  }
  r.pass = ok == trials;
  std::ostringstream det;
  det << ok << "/" << trials << " pairs agree, worst gap " << worst;
  r.detail = det.str();
}

// ---- C2: metric axioms -----------------------------------------------------
void c2_metric_axioms(const Ctx& ctx, CriterionResult& r) {
  Rng rng(derive_seed(ctx.seed, 2));
  const int trials = 200;
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    GridMeasure a = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    GridMeasure b = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    GridMeasure c = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    double ab = emd_exact(a, b).cost;
    double ba = emd_exact(b, a).cost;
    double ac = emd_exact(a, c).cost;
    double cb = emd_exact(c, b).cost;
    bool sym = std::abs(ab - ba) <= 1e-9;
    bool tri = ab <= ac + cb + 1e-9;
    bool self = emd_exact(a, a).cost <= 1e-9;
    if (sym && tri && self) ++ok;
  }
  r.pass = ok == trials;
  r.detail = std::to_string(ok) + "/" + std::to_string(trials) + " triples satisfy the axioms";
}

// ---- C3: embedding lower bound --------------------------------------------
void c3_embedding_lower_bound(const Ctx& ctx, CriterionResult& r) {
  std::ostringstream det;
  bool all = true;
  for (int delta : {16, 64}) {
    const CalEntry& cal = calibration_entry(delta, 2);
    Rng rng(derive_seed(ctx.seed, 3, delta));
    const int trials = 500;
    int ok = 0;
    double worst = 1e18;
    for (int t = 0; t < trials; ++t) {
      GridMeasure a = random_probability(rng, delta, 2, 1 + static_cast<int>(rng.below(12)));
      GridMeasure b = random_probability(rng, delta, 2, 1 + static_cast<int>(rng.below(12)));
      double d = emd_exact(a, b).cost;
      if (d < 1e-9) {
        ++ok;
        continue;
      }
      GridShift s = sample_shift(delta, rng.next());
      double norm = embed_grid(a, &b, s).l1_norm();
      worst = std::min(worst, norm / d);
      if (d <= norm / cal.c_L + 1e-9) ++ok;
    }
    all = all && ok == trials;
    det << "delta=" << delta << ": " << ok << "/" << trials << " (c_L=" << cal.c_L
        << ", min ratio seen " << worst << ") ";
  }
  r.pass = all;
  r.detail = det.str();
}

// ---- C4: sparse-distortion trend ------------------------------------------
void c4_distortion_trend(const Ctx& ctx, CriterionResult& r) {
  const std::vector<int> deltas = {16, 64, 256, 1024};
  const int pairs = 5, shifts_per_pair = 100;

  auto q99 = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(std::floor(0.99 * (v.size() - 1)))];
  };

  std::map<int, double> sparse_q, dense_q;
  for (int delta : deltas) {
    Rng rng(derive_seed(ctx.seed, 4, delta));
    std::vector<double> sparse_ratios, dense_ratios;

    // sparse cell: 1-sparse mu against a spread nu
    for (int p = 0; p < pairs; ++p) {
      GridMeasure mu = random_probability(rng, delta, 2, 1);
      int support = std::min(delta * delta / 2, 96);
      GridMeasure nu = random_probability(rng, delta, 2, support);
      double d = emd_exact(mu, nu).cost;
      if (d < 1e-9) continue;
      for (int s = 0; s < shifts_per_pair; ++s) {
        GridShift sh = sample_shift(delta, rng.next());
        sparse_ratios.push_back(embed_grid(mu, &nu, sh).l1_norm() / d);
      }
    }

    // dense cell: a diffuse lattice measure against its unit shift; the
    // transport is one unit step per atom, so EMD equals the total mass
    // moved (centroid displacement certifies optimality).
    {
      int side = std::min(delta / 2, 32);
      int step = std::max(1, (delta - 2) / side);
      std::vector<Atom> atoms;
      for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
          atoms.push_back({i * step, j * step, 1.0 / (side * side)});
      GridMeasure mu = GridMeasure::make(delta, 2, MeasureKind::probability, atoms);
      for (Atom& a : atoms) a.x += 1;
      GridMeasure nu = GridMeasure::make(delta, 2, MeasureKind::probability, atoms);
      double d = 1.0;  // one unit of x-displacement per unit mass
      for (int p = 0; p < pairs; ++p) {
        for (int s = 0; s < shifts_per_pair; ++s) {
          GridShift sh = sample_shift(delta, rng.next());
          dense_ratios.push_back(embed_grid(mu, &nu, sh).l1_norm() / d);
        }
      }
    }
    sparse_q[delta] = q99(sparse_ratios);
    dense_q[delta] = q99(dense_ratios);
  }

  double sparse_growth = sparse_q[1024] / sparse_q[16];
  double dense_growth = dense_q[1024] / dense_q[16];
  r.pass = sparse_growth < dense_growth;
  std::ostringstream det;
  det << "q99 growth 16->1024: sparse " << sparse_growth << " vs dense " << dense_growth
      << " (sparse q99 " << sparse_q[16] << "->" << sparse_q[1024] << ", dense " << dense_q[16]
      << "->" << dense_q[1024] << ")";
  r.detail = det.str();
}

// ---- C5: Cauchy estimator --------------------------------------------------
void c5_cauchy_estimator(const Ctx& ctx, CriterionResult& r) {
  std::ostringstream det;
  bool all = true;

  // (a) median estimate concentration at eps_c = 0.1, m = 400/eps_c^2
  {
    const double eps_c = 0.1;
    const int m = default_rows(eps_c);  // 40000
    std::vector<EmbeddedVector::Entry> entries;
    Rng vr(derive_seed(ctx.seed, 5, 1));
    for (int i = 0; i < 8; ++i)
      entries.push_back({EmbeddedVector::pack_key(0, i, 0), vr.uniform() * 2.0 - 0.6});
    EmbeddedVector v(EmbedBasis::grid, std::move(entries));
    double l1 = v.l1_norm();
    const int trials = 1000;
    std::vector<int> ok(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
      CauchySketcher sk{m, derive_seed(ctx.seed, 5, 2, t)};
      double est = median_estimate(sketch(v, sk));
      ok[t] = (est >= 0.8 * l1 && est <= 1.2 * l1) ? 1 : 0;
    });
    int good = std::accumulate(ok.begin(), ok.end(), 0);
    bool pass = good >= 950;
    all = all && pass;
    det << "median concentration " << good << "/1000; ";
  }

  // (b) R=9 distance estimates on unit masses at distance 7
  const CalEntry& cal = calibration_entry(16, 2);
  EstimatorParams est;
  est.eps_c = 0.1;
  est.c_L = cal.c_L;
  est.d_eff = effective_distortion(cal, est.eps_c);
  GridMeasure x = GridMeasure::point_mass(16, 2, 4, 4);
  GridMeasure y = GridMeasure::point_mass(16, 2, 8, 7);  // l1 distance 7
  const double truth = 7.0;
  auto run_trials = [&](int R, int trials, uint64_t tag) {
    std::vector<int> fails(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
      auto pipes = make_pipelines(16, 2, PipelineBasis::grid, R, 64,
                                  1, derive_seed(ctx.seed, tag, t));
      AmplifiedSketch xs = sketch_measure(x, std::move(pipes), est);
      double e = estimate_distance(xs, y);
      fails[t] = (e >= truth - 1e-9 && e <= est.d_eff * truth + 1e-9) ? 0 : 1;
    });
    return std::accumulate(fails.begin(), fails.end(), 0);
  };
  {
    int failures = run_trials(9, 200, 52);
    bool pass = failures <= 200 / 3;
    all = all && pass;
    det << "R=9 failures " << failures << "/200 (<=66); ";
  }
  {
    int R = default_repetitions(64);  // 2*ceil(log2 64)+1 = 13
    int failures = run_trials(R, 2000, 53);
    bool pass = failures * 192 <= 2000;  // rate <= 1/(3*64)
    all = all && pass;
    det << "R=" << R << " failures " << failures << "/2000 (<=10)";
  }

  r.pass = all;
  r.detail = det.str();
}

// ---- C6: net coverage ------------------------------------------------------
void c6_net_coverage(const Ctx& ctx, CriterionResult& r) {
  std::ostringstream det;
  bool all = true;

  // coverage at the construction's own constants via the flow witness
  for (int k : {1, 2, 3}) {
    Rng rng(derive_seed(ctx.seed, 6, k));
    GridMeasure mu = random_probability(rng, 16, 2, k);
    double R = 2.0;
    BallCoverRequest req{mu, R, k};
    CoverParams paper = CoverParams::paper_constants();
    int ok = 0;
    double worst = 0.0;
    const int samples = 200;
    for (int s = 0; s < samples; ++s) {
      GridMeasure nu = sample_in_ball_sparse(mu, R, k, derive_seed(ctx.seed, 60, k, s));
      GridMeasure w = cover_witness(req, paper, nu);
      double d = emd_exact(nu, w).cost;
      worst = std::max(worst, d / R);
      if (d <= R / 2.0 + 1e-9) ++ok;
    }
    all = all && ok == samples;
    det << "k=" << k << ": " << ok << "/" << samples << " within R/2 (worst d/R " << worst
        << "); ";
  }

  // cover-size growth: log10 family size against k * loglog(delta)
  {
    std::vector<double> xs, ys;
    std::ostringstream sizes;
    double prev_k_size = -1.0;
    bool monotone = true;
    for (int k : {1, 2, 3}) {
      double prev_delta_size = -1.0;
      for (int delta : {16, 64, 256}) {
        Rng rng(derive_seed(ctx.seed, 61, k, delta));
        GridMeasure mu = random_probability(rng, delta, 2, k);
        BallCoverRequest req{mu, 2.0, k};
        double lg = cover_family_log10_size(req, CoverParams::paper_constants());
        xs.push_back(k * std::log2(std::log2(static_cast<double>(delta))));
        ys.push_back(lg);
        sizes << "k" << k << ",d" << delta << ":" << lg << " ";
        if (prev_delta_size >= 0 && lg < prev_delta_size) monotone = false;
        prev_delta_size = lg;
        if (delta == 256) {
          if (prev_k_size >= 0 && lg < prev_k_size) monotone = false;
          prev_k_size = lg;
        }
      }
    }
    // least squares fit y ~ c*x + c'; then lift c' so the bound holds everywhere
    double n = xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    double c = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double c0 = (sy - c * sx) / n;
    double lift = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      lift = std::max(lift, ys[i] - (c * xs[i] + c0));
    bool fit_ok = std::isfinite(c) && c > 0.0 && lift < 0.5 * (c * xs.back() + c0 + lift);
    all = all && fit_ok && monotone;
    det << "growth fit log10|cover| <= " << c << "*k*loglog(delta) + " << (c0 + lift)
        << (monotone ? " (monotone)" : " (NOT monotone)") << " [" << sizes.str() << "]";
  }

  r.pass = all;
  r.detail = det.str();
}

// ---- C7: oracle-mode search ------------------------------------------------
void c7_oracle_search(const Ctx& ctx, CriterionResult& r) {
  const int trials = 100;
  const int delta = 16, k = 2;
  const double epsilon = 0.25, lambda = 0.8;

  struct TrialOut {
    bool guarantee = false, key_est = false, ret_yi = false, ret_yl = false, budget = false;
  };
  std::vector<TrialOut> outs(trials);

  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(ctx.seed, 7, t));
    GridMeasure x = random_probability(rng, delta, 2, k);  // exactly k-sparse
    double opt = best_k_sparse(x, k).cost;                 // 0 by construction
    const GridMeasure& ystar = x;

    struct LevelCap {
      double r;
      double min_dist_to_star;
      double q_prev;
    };
    std::vector<LevelCap> caps;
    GridMeasure y_prev = center_point_mass(delta, 2);
    SearchAudit audit = [&](int level, const std::vector<GridMeasure>& S,
                            const GridMeasure& yprev, double r_i) {
      (void)level;
      double md = 1e18;
      for (const GridMeasure& s : S) md = std::min(md, emd_exact(ystar, s).cost);
      caps.push_back({r_i, md, emd_exact(x, yprev).cost});
      y_prev = yprev;
    };
    RecoveryResult res = recover_oracle(x, k, epsilon, lambda, nullptr, &audit);

    TrialOut o;
    double final_d = emd_exact(x, res.estimate).cost;
    double bound = std::max((1.0 + epsilon) * res.params.D_eff * res.params.K_quasi * opt, lambda);
    o.guarantee = final_d <= bound + 1e-9;

    // key_estimate audit: whenever q(y_{i-1}) <= gamma * r_{i-1}, the nearest
    // k-sparse y* must be within r_i of S_i
    o.key_est = true;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      double r_prev = caps[i].r / res.params.alpha;
      if (caps[i].q_prev <= res.params.gamma * r_prev) {
        if (caps[i].min_dist_to_star > caps[i].r + 1e-9) {
          o.key_est = false;
          break;
        }
      }
    }

    // return_yi audit: early returns bound the approximation ratio
    o.ret_yi = true;
    if (res.early_return && opt > 1e-12) {
      double ratio = final_d / opt;
      double cap = res.params.D_eff * res.params.K_quasi * res.params.gamma /
                   (res.params.alpha * (res.params.gamma - res.params.D_eff * res.params.K_quasi));
      o.ret_yi = ratio < cap + 1e-9;
    } else if (res.early_return) {
      o.ret_yi = final_d <= lambda + 1e-9;  // opt = 0: the lambda floor must hold
    }

    // return_yl audit: full-depth returns satisfy the radius bound
    o.ret_yl = true;
    if (!res.early_return && !res.degenerate_level) {
      double cap = 2.0 * res.params.gamma * std::pow(res.params.alpha, res.params.L) *
                   res.params.Lambda;
      o.ret_yl = final_d <= cap + 1e-9;
    }

    o.budget = res.distinct_queries <= 200000;
    outs[t] = o;
  });

  int g = 0, ke = 0, ri = 0, rl = 0, bu = 0;
  for (const TrialOut& o : outs) {
    g += o.guarantee;
    ke += o.key_est;
    ri += o.ret_yi;
    rl += o.ret_yl;
    bu += o.budget;
  }
  r.pass = g == trials && ke == trials && ri == trials && rl == trials && bu == trials;
  std::ostringstream det;
  det << "guarantee " << g << "/100, key_estimate " << ke << "/100, return_yi " << ri
      << "/100, return_yl " << rl << "/100, query budget " << bu << "/100";
  r.detail = det.str();
}

// ---- C8: end-to-end sketch recovery ----------------------------------------
void c8_end_to_end(const Ctx& ctx, CriterionResult& r) {
  const int trials = 50;
  const int delta = 16, k = 2;
  const double epsilon = 0.25;
  const double lambda = 0.05 * delta;

  RecoverConfig config;
  config.eps_c = 0.15;
  config.m = 256;
  config.query_budget = 4096;
  const CalEntry& cal = calibration_entry(delta, 2);
  double d_eff = effective_distortion(cal, config.eps_c);

  std::vector<int> success(trials, 0);
  std::vector<double> ratios(trials, 0.0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(ctx.seed, 8, t));
    GridMeasure x = clustered_instance(rng, delta, 2, k, 0.10, 6);
    double opt = best_k_sparse(x, k).cost;
    RecoveryResult res = recover_square(x, k, epsilon, lambda, derive_seed(ctx.seed, 80, t),
                                        config);
    double cost = emd_exact(x, res.estimate).cost;
    double bound = (1.0 + epsilon) * d_eff * opt + lambda;
    success[t] = cost <= bound + 1e-9 ? 1 : 0;
    ratios[t] = opt > 1e-12 ? cost / opt : cost;
  });
  int wins = std::accumulate(success.begin(), success.end(), 0);
  r.pass = 3 * wins >= 2 * trials;
  std::ostringstream det;
  det << wins << "/" << trials << " trials within (1+eps)*D_eff*opt+lambda (D_eff=" << d_eff
      << ")";
  r.detail = det.str();
}

// ---- C9: 1-d recovery tightness --------------------------------------------
void c9_interval_recovery(const Ctx& ctx, CriterionResult& r) {
  const int trials = 30;
  const int delta = 64, k = 2;
  const double lambda = 0.05 * delta;
  const double epsilon = 0.06;

  RecoverConfig config;
  config.eps_c = 0.1;
  config.m = 384;
  config.query_budget = 4096;

  std::vector<Atom> full_line;
  for (int i = 0; i < delta; ++i) full_line.push_back({i, 0, 0.0});

  std::vector<int> success(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(ctx.seed, 9, t));
    GridMeasure x = clustered_instance(rng, delta, 1, k, 0.10, 5);
    double opt = best_k_sparse(x, k, full_line).cost;
    RecoveryResult res = recover_interval(x, k, epsilon, lambda, derive_seed(ctx.seed, 90, t),
                                          config);
    double cost = emd_exact(x, res.estimate).cost;
    success[t] = cost <= 1.3 * opt + lambda + 1e-9 ? 1 : 0;
  });
  int wins = std::accumulate(success.begin(), success.end(), 0);
  r.pass = 3 * wins >= 2 * trials;
  r.detail = std::to_string(wins) + "/" + std::to_string(trials) +
             " trials within 1.3*opt+lambda";
}

// ---- C10: packing certificates ---------------------------------------------
void c10_packing(const Ctx& ctx, CriterionResult& r) {
  std::ostringstream det;
  bool all = true;
  for (int delta : {64, 256}) {
    PackingFamily f = gen_packing_1d(4, delta);
    int ok = 0;
    for (int s = 0; s < 20; ++s) {
      GridMeasure b = f.B(f.sample_index(derive_seed(ctx.seed, 10, delta, s)));
      double d = emd_exact(f.A, b).cost;
      if (std::abs(d - f.expected_distance) <= 1e-9) ++ok;
    }
    all = all && ok == 20;
    det << "delta=" << delta << " certificates " << ok << "/20; ";
  }
  {
    PackingFamily f64 = gen_packing_1d(4, 64);
    PackingFamily f1024 = gen_packing_1d(4, 1024);
    ProbeResult p64 = doubling_probe(f64, 2.0, 4.0 / 200.0, 60, derive_seed(ctx.seed, 101));
    ProbeResult p1024 = doubling_probe(f1024, 2.0, 4.0 / 200.0, 60, derive_seed(ctx.seed, 102));
    bool grow = p1024.separated > p64.separated;
    all = all && grow;
    det << "probe separated " << p64.separated << " (delta 64) -> " << p1024.separated
        << " (delta 1024)";
  }
  r.pass = all;
  r.detail = det.str();
}

// ---- C11: 1-median ----------------------------------------------------------
void c11_median(const Ctx& ctx, CriterionResult& r) {
  std::ostringstream det;
  bool all = true;
  {
    const int trials = 100, n = 64, m = 2000;
    const double eps = 0.2;
    std::vector<int> good(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
      Rng rng(derive_seed(ctx.seed, 11, t));
      MedianInstance1D inst;
      inst.n = n;
      int support = 3 + static_cast<int>(rng.below(8));
      for (int i = 0; i < support; ++i)
        inst.weights.push_back({static_cast<int>(rng.below(n)), 0.2 + rng.uniform()});
      auto [jopt, opt] = inst.brute_force();
      (void)jopt;
      Median1DResult res = median_1d(inst, m, eps, derive_seed(ctx.seed, 110, t));
      good[t] = inst.cost(res.j_hat) <= (1.0 + eps) * opt + 1e-9 ? 1 : 0;
    });
    int wins = std::accumulate(good.begin(), good.end(), 0);
    all = all && wins >= 90;
    det << "median_1d " << wins << "/100; ";
  }
  {
    const int trials = 100, n = 8, d = 2, m = 800;
    const double eps = 0.2;
    std::vector<int> good(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
      Rng rng(derive_seed(ctx.seed, 12, t));
      MedianInstanceD inst;
      inst.n = n;
      inst.d = d;
      int support = 5;
      for (int i = 0; i < support; ++i) {
        std::vector<int> p = {static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n))};
        inst.points.push_back({p, 0.2 + rng.uniform()});
      }
      auto [popt, opt] = inst.brute_force();
      (void)popt;
      MedianDResult res = median_dd(inst, m, eps, derive_seed(ctx.seed, 120, t));
      good[t] = inst.cost(res.p_hat) <= (1.0 + eps) * (1.0 + eps) * opt + 1e-9 ? 1 : 0;
    });
    int wins = std::accumulate(good.begin(), good.end(), 0);
    all = all && wins >= 90;
    det << "median_dd " << wins << "/100";
  }
  r.pass = all;
  r.detail = det.str();
}

// ---- C12: determinism --------------------------------------------------------
void c12_determinism(const Ctx& ctx, CriterionResult& r) {
  auto run_once = [&]() {
    std::ostringstream out;
    // recovery JSON
    Rng rng(derive_seed(ctx.seed, 13));
    GridMeasure x = clustered_instance(rng, 16, 2, 2, 0.1, 4);
    RecoverConfig config;
    config.eps_c = 0.2;
    config.m = 64;
    config.R = 5;
    out << recovery_to_json(recover_square(x, 2, 0.25, 2.0, 7, config));
    // estimator CSV
    CsvReport csv({"trial", "estimate"}, "{\"cmd\":\"estimate\",\"seed\":7}", 7);
    const CalEntry& cal = calibration_entry(16, 2);
    EstimatorParams est{0.1, cal.c_L, effective_distortion(cal, 0.1)};
    GridMeasure a = GridMeasure::point_mass(16, 2, 1, 1);
    GridMeasure b = GridMeasure::point_mass(16, 2, 5, 4);
    for (int t = 0; t < 5; ++t) {
      auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 5, 64, 1, derive_seed(7, t));
      AmplifiedSketch xs = sketch_measure(a, std::move(pipes), est);
      csv.add_row({cell(t), cell(estimate_distance(xs, b))});
    }
    out << csv.to_string();
    // packing CSV
    PackingFamily f = gen_packing_1d(4, 64);
    CsvReport pcsv({"sample", "emd"}, "{\"cmd\":\"packing\"}", 7);
    for (int s = 0; s < 5; ++s) {
      GridMeasure bm = f.B(f.sample_index(derive_seed(7, s)));
      pcsv.add_row({cell(s), cell(emd_exact(f.A, bm).cost)});
    }
    out << pcsv.to_string();
    // calibration file body
    CalibrationTable t;
    t.entries[{16, 2}] = calibrate_grid_embedding(16, 2, 60, 7);
    out << calibration_to_json(t);
    return out.str();
  };
  std::string first = run_once();
  std::string second = run_once();
  r.pass = first == second;
  r.detail = r.pass ? "reports byte-identical across reruns"
                    : "reports differ between identical runs";
}

struct Entry {
  int id;
  const char* name;
  double limit;
  CriterionFn fn;
};

const Entry kCriteria[] = {
    {1, "cdf-isometry", 10.0, c1_cdf_isometry},
    {2, "metric-axioms", 30.0, c2_metric_axioms},
    {3, "embedding-lower-bound", 60.0, c3_embedding_lower_bound},
    {4, "sparse-distortion-trend", 300.0, c4_distortion_trend},
    {5, "cauchy-estimator", 120.0, c5_cauchy_estimator},
    {6, "net-coverage", 600.0, c6_net_coverage},
    {7, "oracle-mode-search", 600.0, c7_oracle_search},
    {8, "end-to-end-recovery", 1200.0, c8_end_to_end},
    {9, "interval-recovery", 600.0, c9_interval_recovery},
    {10, "packing-certificates", 300.0, c10_packing},
    {11, "one-median", 300.0, c11_median},
    {12, "determinism", 300.0, c12_determinism},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  Ctx ctx{opts.seed, opts.out_dir};
  std::vector<CriterionResult> results;
  for (const Entry& e : kCriteria) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), e.id) == opts.only.end())
      continue;
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.limit_seconds = e.limit;
    auto start = std::chrono::steady_clock::now();
    try {
      e.fn(ctx, r);
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.limit_seconds) {
      r.pass = false;
      r.detail += " [over time limit]";
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_criterion(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.pass ? "[PASS]" : "[FAIL]") << " C" << r.id << " " << r.name << " ("
      << static_cast<int>(r.seconds * 100) / 100.0 << "s/" << r.limit_seconds << "s): "
      << r.detail;
  return out.str();
}

}  // namespace emdsketch
