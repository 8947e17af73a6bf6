#include "emdsketch/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "emdsketch/rng.hpp"

namespace emdsketch {

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  // Shortest representation that parses back to the same double.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

GridMeasure GridMeasure::make(int delta, int dims, MeasureKind kind, std::vector<Atom> atoms) {
  require(delta >= 1, "measure: delta must be positive");
  require(dims == 1 || dims == 2, "measure: dims must be 1 or 2");
  std::map<std::pair<int, int>, double> merged;
  for (const Atom& a : atoms) {
    require(a.w >= 0.0, "measure: negative weight");
    require(a.x >= 0 && a.x < delta, "measure: x coordinate out of [0, delta)");
    if (dims == 2) {
      require(a.y >= 0 && a.y < delta, "measure: y coordinate out of [0, delta)");
    } else {
      require(a.y == 0, "measure: 1-d measures must have y == 0");
    }
    merged[{a.x, a.y}] += a.w;
  }
  GridMeasure m;
  m.delta_ = delta;
  m.dims_ = dims;
  m.kind_ = kind;
  m.atoms_.reserve(merged.size());
  for (const auto& [pt, w] : merged) {
    if (w > 1e-12) m.atoms_.push_back({pt.first, pt.second, w});
  }
  if (kind == MeasureKind::probability) {
    double total = m.total_mass();
    require(std::abs(total - 1.0) <= kMassTol,
            "measure: probability kind requires total mass 1 (got " + format_double(total) + ")");
  }
  return m;
}

GridMeasure GridMeasure::point_mass(int delta, int dims, int x, int y) {
  return make(delta, dims, MeasureKind::probability, {{x, y, 1.0}});
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.w;
  return s;
}

bool GridMeasure::is_probability() const { return std::abs(total_mass() - 1.0) <= kMassTol; }

GridMeasure GridMeasure::scaled(double c) const {
  require(c > 0.0, "scaled: factor must be positive");
  std::vector<Atom> out = atoms_;
  for (Atom& a : out) a.w *= c;
  MeasureKind k = kind_;
  if (k == MeasureKind::probability && std::abs(c - 1.0) > 1e-15) k = MeasureKind::general;
  return make(delta_, dims_, k, std::move(out));
}

std::string GridMeasure::canonical_key() const {
  std::string s;
  s.reserve(atoms_.size() * 24);
  for (const Atom& a : atoms_) {
    s += std::to_string(a.x);
    s += ',';
    s += std::to_string(a.y);
    s += ':';
    s += format_double(a.w);
    s += ';';
  }
  return s;
}

uint64_t GridMeasure::hash() const {
  // Weights quantized so that values differing only by ~1e-12 arithmetic
  // noise collide (dedup wants that).
  uint64_t h = 0x243f6a8885a308d3ULL ^ (static_cast<uint64_t>(delta_) << 8) ^ dims_;
  for (const Atom& a : atoms_) {
    uint64_t q = static_cast<uint64_t>(std::llround(a.w * 1e10));
    h = mix64(h ^ (static_cast<uint64_t>(static_cast<uint32_t>(a.x)) << 32 |
                   static_cast<uint32_t>(a.y)));
    h = mix64(h ^ q);
  }
  return h;
}

double TransportPlan::cost(int delta, int dims) const {
  double c = 0.0;
  for (const Edge& e : edges) {
    c += e.mass * (std::abs(e.sx - e.tx) + std::abs(e.sy - e.ty));
  }
  double diameter_penalty = static_cast<double>(dims) * delta;
  c += diameter_penalty * (slack_source_mass + slack_target_mass);
  return c;
}

namespace {

bool parse_kv(const std::string& tok, const std::string& key, std::string& val) {
  if (tok.rfind(key + "=", 0) != 0) return false;
  val = tok.substr(key.size() + 1);
  return true;
}

}  // namespace

GridMeasure parse_measure(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("measure file: empty input");
  std::istringstream hs(header);
  std::string magic, ver;
  hs >> magic >> ver;
  if (magic != "emd-measure" || ver != "v1")
    throw IoError("measure file: bad header '" + header + "'");
  int delta = -1, dims = -1;
  MeasureKind kind = MeasureKind::general;
  bool kind_seen = false;
  std::string tok, val;
  while (hs >> tok) {
    if (parse_kv(tok, "delta", val)) {
      delta = std::stoi(val);
    } else if (parse_kv(tok, "dims", val)) {
      dims = std::stoi(val);
    } else if (parse_kv(tok, "kind", val)) {
      kind_seen = true;
      if (val == "probability") {
        kind = MeasureKind::probability;
      } else if (val == "general") {
        kind = MeasureKind::general;
      } else {
        throw IoError("measure file: unknown kind '" + val + "'");
      }
    } else {
      throw IoError("measure file: unknown header field '" + tok + "'");
    }
  }
  if (delta < 1 || (dims != 1 && dims != 2) || !kind_seen)
    throw IoError("measure file: header must set delta, dims and kind");

  std::vector<Atom> atoms;
  std::vector<std::pair<int, int>> seen;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Atom a;
    double w;
    if (dims == 2) {
      if (!(ls >> a.x >> a.y >> w)) throw IoError("measure file: bad atom at line " + std::to_string(lineno));
    } else {
      if (!(ls >> a.x >> w)) throw IoError("measure file: bad atom at line " + std::to_string(lineno));
      a.y = 0;
    }
    std::string extra;
    if (ls >> extra) throw IoError("measure file: trailing tokens at line " + std::to_string(lineno));
    if (a.x < 0 || a.x >= delta || (dims == 2 && (a.y < 0 || a.y >= delta)))
      throw IoError("measure file: coordinate out of range at line " + std::to_string(lineno));
    if (w <= 0.0) throw IoError("measure file: nonpositive weight at line " + std::to_string(lineno));
    auto key = std::make_pair(a.x, a.y);
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw IoError("measure file: duplicate point at line " + std::to_string(lineno));
    seen.push_back(key);
    a.w = w;
    atoms.push_back(a);
  }
  try {
    return GridMeasure::make(delta, dims, kind, std::move(atoms));
  } catch (const ContractViolation& e) {
    throw IoError(std::string("measure file: ") + e.what());
  }
}

GridMeasure parse_measure_string(const std::string& text) {
  std::istringstream s(text);
  return parse_measure(s);
}

GridMeasure load_measure(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open measure file: " + path);
  return parse_measure(f);
}

std::string format_measure(const GridMeasure& m) {
  std::ostringstream out;
  out << "emd-measure v1 delta=" << m.delta() << " dims=" << m.dims() << " kind="
      << (m.kind() == MeasureKind::probability ? "probability" : "general") << "\n";
  for (const Atom& a : m.atoms()) {
    out << a.x;
    if (m.dims() == 2) out << ' ' << a.y;
    out << ' ' << format_double(a.w) << "\n";
  }
  return out.str();
}

void save_measure(const GridMeasure& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write measure file: " + path);
  f << format_measure(m);
}

}  // namespace emdsketch
