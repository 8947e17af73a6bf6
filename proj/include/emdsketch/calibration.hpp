#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace emdsketch {

// Empirical constants for the grid embedding at one (delta, dims):
//   c_L   — one-sided lower bound: EMD <= c_L^-1 * ||G_s mu||_1 held on every
//           calibration sample; stored as 0.9 times the observed minimum
//           ratio (conservative).
//   q99   — 0.99 quantile of the ratio ||G_s mu||_1 / EMD over sparse pairs;
//           the estimator's upper distortion ingredient.
struct CalEntry {
  double c_L = 1.0;
  double q99 = 1.0;
  uint64_t seed = 0;
  int sample_count = 0;
};

struct CalibrationTable {
  // key: (delta, dims)
  std::map<std::pair<int, int>, CalEntry> entries;

  const CalEntry& at(int delta, int dims) const;
  bool has(int delta, int dims) const;
};

// Effective estimator distortion for given Cauchy accuracy: the grid
// embedding stretches by at most q99 (with prob 0.99 over the shift), the
// median estimate multiplies by (1 +- eps_c), and the estimate divides by
// (1 - eps_c) * c_L.
double effective_distortion(const CalEntry& e, double eps_c);

// Samples random (pair, shift) ratios at the given delta and records c_L and
// q99. The pair distribution mixes sparse-vs-random and random-vs-random
// supports at several separations.
CalEntry calibrate_grid_embedding(int delta, int dims, int samples, uint64_t seed);

std::string calibration_to_json(const CalibrationTable& t);
CalibrationTable calibration_from_json(const std::string& text);
void save_calibration(const CalibrationTable& t, const std::string& path);
CalibrationTable load_calibration(const std::string& path);

// Resolution order: explicit path argument, EMD_SKETCH_CALIBRATION env var,
// then on-demand calibration with the default seed (42) and 600 samples.
CalibrationTable& default_calibration(const std::string& explicit_path = "");
const CalEntry& calibration_entry(int delta, int dims, const std::string& explicit_path = "");

}  // namespace emdsketch
