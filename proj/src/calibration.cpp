#include "emdsketch/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <vector>

#include "emdsketch/embed.hpp"
#include "emdsketch/exact.hpp"
#include "emdsketch/measure.hpp"
#include "emdsketch/rng.hpp"
#include "json.hpp"

namespace emdsketch {

const CalEntry& CalibrationTable::at(int delta, int dims) const {
  auto it = entries.find({delta, dims});
  require(it != entries.end(), "calibration: no entry for delta=" + std::to_string(delta) +
                                   " dims=" + std::to_string(dims));
  return it->second;
}

bool CalibrationTable::has(int delta, int dims) const {
  return entries.count({delta, dims}) > 0;
}

double effective_distortion(const CalEntry& e, double eps_c) {
  return (1.0 + eps_c) / (1.0 - eps_c) * e.q99 / e.c_L;
}

namespace {

GridMeasure random_measure(Rng& rng, int delta, int dims, int support) {
  std::vector<Atom> atoms;
  for (int i = 0; i < support; ++i) {
    Atom a;
    a.x = static_cast<int>(rng.below(delta));
    a.y = dims == 2 ? static_cast<int>(rng.below(delta)) : 0;
    a.w = 0.05 + rng.uniform();
    atoms.push_back(a);
  }
  // normalize to probability
  double total = 0.0;
  for (const Atom& a : atoms) total += a.w;
  for (Atom& a : atoms) a.w /= total;
  return GridMeasure::make(delta, dims, MeasureKind::probability, std::move(atoms));
}

}  // namespace

CalEntry calibrate_grid_embedding(int delta, int dims, int samples, uint64_t seed) {
  require(samples >= 10, "calibrate: need at least 10 samples");
  Rng rng(derive_seed(seed, 0xca1, delta, dims));
  std::vector<double> ratios;
  ratios.reserve(samples);
  int made = 0;
  while (made < samples) {
    // cycle through support profiles: sparse vs spread, both sparse, both spread
    int profile = made % 3;
    int sa = profile == 2 ? 2 + static_cast<int>(rng.below(14)) : 1 + static_cast<int>(rng.below(3));
    int sb = profile == 1 ? 1 + static_cast<int>(rng.below(3)) : 2 + static_cast<int>(rng.below(14));
    GridMeasure a = random_measure(rng, delta, dims, sa);
    GridMeasure b = random_measure(rng, delta, dims, sb);
    double d = emd_exact(a, b).cost;
    if (d < 1e-9) continue;
    GridShift s = sample_shift(delta, rng.next());
    double norm = embed_grid(a, &b, s).l1_norm();
    ratios.push_back(norm / d);
    ++made;
  }
  std::sort(ratios.begin(), ratios.end());
  CalEntry e;
  e.c_L = 0.9 * ratios.front();
  e.q99 = ratios[static_cast<std::size_t>(std::min<double>(ratios.size() - 1.0,
                                                           std::ceil(0.99 * ratios.size())))];
  e.seed = seed;
  e.sample_count = samples;
  return e;
}

std::string calibration_to_json(const CalibrationTable& t) {
  nlohmann::json j;
  j["version"] = kVersion;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [key, e] : t.entries) {
    nlohmann::json row;
    row["delta"] = key.first;
    row["dims"] = key.second;
    row["c_L"] = e.c_L;
    row["q99"] = e.q99;
    row["seed"] = e.seed;
    row["sample_count"] = e.sample_count;
    arr.push_back(row);
  }
  j["entries"] = arr;
  return j.dump(2);
}

CalibrationTable calibration_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CalibrationTable t;
  for (const auto& row : j.at("entries")) {
    CalEntry e;
    e.c_L = row.at("c_L").get<double>();
    e.q99 = row.at("q99").get<double>();
    e.seed = row.at("seed").get<uint64_t>();
    e.sample_count = row.at("sample_count").get<int>();
    t.entries[{row.at("delta").get<int>(), row.at("dims").get<int>()}] = e;
  }
  return t;
}

void save_calibration(const CalibrationTable& t, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write calibration file: " + path);
  f << calibration_to_json(t);
}

CalibrationTable load_calibration(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open calibration file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return calibration_from_json(ss.str());
}

namespace {
std::mutex g_cal_mutex;
CalibrationTable g_cal;
bool g_cal_loaded = false;
}  // namespace

CalibrationTable& default_calibration(const std::string& explicit_path) {
  std::lock_guard<std::mutex> lock(g_cal_mutex);
  if (!g_cal_loaded) {
    std::string path = explicit_path;
    if (path.empty()) {
      const char* env = std::getenv("EMD_SKETCH_CALIBRATION");
      if (env) path = env;
    }
    if (!path.empty()) {
      g_cal = load_calibration(path);
    }
    g_cal_loaded = true;
  }
  return g_cal;
}

const CalEntry& calibration_entry(int delta, int dims, const std::string& explicit_path) {
  CalibrationTable& t = default_calibration(explicit_path);
  {
    std::lock_guard<std::mutex> lock(g_cal_mutex);
    if (t.entries.count({delta, dims})) return t.entries[{delta, dims}];
  }
  CalEntry e = calibrate_grid_embedding(delta, dims, 600, 42);
  std::lock_guard<std::mutex> lock(g_cal_mutex);
  auto [it, inserted] = t.entries.emplace(std::make_pair(delta, dims), e);
  return it->second;
}

}  // namespace emdsketch
