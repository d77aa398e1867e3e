#include "leq/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "leq/rng.hpp"

namespace leq::data {

namespace {

using nlohmann::json;

json jet_to_json(const JetRecord& r) {
  json particles = json::array();
  for (const auto& p : r.particles) {
    particles.push_back(json::array({p.e, p.px, p.py, p.pz}));
  }
  json out{{"label", r.label}, {"particles", particles}};
  if (!r.scalars.empty()) out["scalars"] = r.scalars;
  return out;
}

JetRecord jet_from_json(const json& j, int line) {
  JetRecord r;
  if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
  if (!j.contains("label") || !j["label"].is_number_integer()) {
    throw SchemaError(line, "label: missing or not an integer");
  }
  r.label = j["label"].get<int>();
  if (r.label != 0 && r.label != 1) {
    throw SchemaError(line, "label: must be 0 or 1");
  }
  if (!j.contains("particles") || !j["particles"].is_array() ||
      j["particles"].empty()) {
    throw SchemaError(line, "particles: missing or empty");
  }
  int idx = 0;
  for (const auto& p : j["particles"]) {
    if (!p.is_array() || p.size() != 4) {
      throw SchemaError(line, "particles[" + std::to_string(idx) +
                                  "]: must have 4 components");
    }
    FourVector v;
    double comps[4];
    for (int c = 0; c < 4; ++c) {
      if (!p[c].is_number()) {
        throw SchemaError(line, "particles[" + std::to_string(idx) + "][" +
                                    std::to_string(c) + "]: not a number");
      }
      comps[c] = p[c].get<double>();
      if (!std::isfinite(comps[c])) {
        throw SchemaError(line, "particles[" + std::to_string(idx) + "][" +
                                    std::to_string(c) + "]: not finite");
      }
    }
    v = FourVector(comps[0], comps[1], comps[2], comps[3]);
    r.particles.push_back(v);
    ++idx;
  }
  if (j.contains("scalars")) {
    if (!j["scalars"].is_array() ||
        j["scalars"].size() != r.particles.size()) {
      throw SchemaError(line, "scalars: must list one entry per particle");
    }
    idx = 0;
    for (const auto& s : j["scalars"]) {
      if (!s.is_array()) {
        throw SchemaError(line,
                          "scalars[" + std::to_string(idx) + "]: not a list");
      }
      std::vector<double> vals;
      for (const auto& v : s) {
        if (!v.is_number()) {
          throw SchemaError(line, "scalars[" + std::to_string(idx) +
                                      "]: entries must be numbers");
        }
        vals.push_back(v.get<double>());
      }
      r.scalars.push_back(std::move(vals));
      ++idx;
    }
  }
  for (const auto& extra : j.items()) {
    if (extra.key() != "label" && extra.key() != "particles" &&
        extra.key() != "scalars") {
      throw SchemaError(line, "unknown field '" + extra.key() + "'");
    }
  }
  return r;
}

}  // namespace

std::string IngestStats::to_json() const {
  nlohmann::ordered_json j;
  j["read"] = read;
  j["parsed"] = parsed;
  j["skipped_min_particles"] = skipped_min_particles;
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) {
    j["errors"].push_back({{"line", e.line}, {"message", e.message}});
  }
  return j.dump(2);
}

std::vector<JetRecord> parse_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<JetRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(lineno, std::string("invalid JSON: ") + e.what());
    }
    out.push_back(jet_from_json(j, lineno));
  }
  return out;
}

void write_jsonl(const std::vector<JetRecord>& records,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : records) out << jet_to_json(r).dump() << "\n";
}

std::vector<ImageRecord> parse_image_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ImageRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("label") || !j.contains("pixels")) {
      throw SchemaError(lineno, "expected {label, pixels}");
    }
    ImageRecord rec;
    rec.label = j["label"].get<int>();
    if (!j["pixels"].is_array() || j["pixels"].empty()) {
      throw SchemaError(lineno, "pixels: missing or empty");
    }
    std::size_t width = 0;
    for (const auto& row : j["pixels"]) {
      if (!row.is_array()) throw SchemaError(lineno, "pixels: rows must be lists");
      std::vector<double> r;
      for (const auto& v : row) {
        if (!v.is_number()) throw SchemaError(lineno, "pixels: not a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw SchemaError(lineno, "pixels: not finite");
        r.push_back(d);
      }
      if (width == 0) width = r.size();
      if (r.size() != width) throw SchemaError(lineno, "pixels: ragged rows");
      rec.pixels.push_back(std::move(r));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<JetGraph> build_jet_graph(const JetRecord& r, int min_particles) {
  if (static_cast<int>(r.particles.size()) < min_particles) return std::nullopt;
  JetGraph g;
  g.label = r.label;
  g.momenta = r.particles;
  g.scalars = r.scalars;
  return g;
}

JetGraph image_to_graph(const ImageRecord& image, int max_points,
                        ImageFeatureMode mode) {
  const std::size_t rows = image.pixels.size();
  const std::size_t cols = rows ? image.pixels[0].size() : 0;
  double peak = 0.0;
  double total = 0.0;
  for (const auto& row : image.pixels) {
    for (const double v : row) {
      peak = std::max(peak, v);
      total += v;
    }
  }
  struct Px {
    double intensity;
    std::size_t r, c;
  };
  std::vector<Px> bright;
  const double threshold = 0.01 * peak;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = image.pixels[r][c];
      if (peak > 0.0 && v > threshold) bright.push_back({v, r, c});
    }
  }
  if (bright.empty()) {
    throw std::runtime_error("image_to_graph: no pixels above threshold");
  }
  std::stable_sort(bright.begin(), bright.end(),
                   [](const Px& a, const Px& b) { return a.intensity > b.intensity; });
  if (static_cast<int>(bright.size()) > max_points) {
    bright.resize(static_cast<std::size_t>(max_points));
  }

  JetGraph g;
  g.label = image.label;
  const std::size_t n = bright.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Px& p = bright[k];
    const double x_norm = (static_cast<double>(p.c) + 0.5) / static_cast<double>(cols);
    const double y_norm = (static_cast<double>(p.r) + 0.5) / static_cast<double>(rows);
    g.momenta.emplace_back(p.intensity, x_norm, y_norm, 0.0);
    const double dx = x_norm - 0.5;
    const double dy = y_norm - 0.5;
    if (mode == ImageFeatureMode::kHep8) {
      const double radial = std::sqrt(dx * dx + dy * dy) / std::sqrt(0.5);
      const double azimuth = std::atan2(dy, dx);
      const double rank_pct =
          n > 1 ? 1.0 - static_cast<double>(k) / static_cast<double>(n - 1) : 1.0;
      g.scalars.push_back({p.intensity, x_norm, y_norm, radial, azimuth,
                           signed_log1p(p.intensity),
                           total > 0.0 ? p.intensity / total : 0.0, rank_pct});
    } else {
      g.scalars.push_back({x_norm, y_norm, p.intensity, 0.0});
    }
  }
  return g;
}

DatasetSplit stratified_split(const std::vector<int>& labels,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed) {
  std::vector<int> classes;
  for (const int l : labels) {
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) {
      classes.push_back(l);
    }
  }
  std::sort(classes.begin(), classes.end());
  DatasetSplit split;
  for (const int cls : classes) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(static_cast<int>(i));
    }
    if (idx.size() < 10) {
      throw std::runtime_error("stratified_split: class " + std::to_string(cls) +
                               " has fewer than 10 samples");
    }
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    const std::size_t n = idx.size();
    const std::size_t n_train = static_cast<std::size_t>(ratios[0] * n);
    const std::size_t n_val = static_cast<std::size_t>(ratios[1] * n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_train) {
        split.train.push_back(idx[i]);
      } else if (i < n_train + n_val) {
        split.validation.push_back(idx[i]);
      } else {
        split.test.push_back(idx[i]);
      }
    }
  }
  return split;
}

std::vector<JetRecord> synth_jets(std::uint64_t seed, int n_per_class,
                                  const SynthParams& params) {
  if (n_per_class < 1) {
    throw std::invalid_argument("synth_jets: n_per_class must be >= 1");
  }
  std::vector<JetRecord> jets;
  jets.reserve(2 * static_cast<std::size_t>(n_per_class));
  for (int idx = 0; idx < 2 * n_per_class; ++idx) {
    const int label = idx % 2;
    Rng rng(derive_seed(seed, "synth_jet", static_cast<std::uint64_t>(idx)));
    // isotropic jet axis
    const double cz = rng.uniform(-1.0, 1.0);
    const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    const double aphi = rng.uniform(0.0, 6.283185307179586);
    const double axis[3] = {sz * std::cos(aphi), sz * std::sin(aphi), cz};
    // orthonormal frame around the axis
    double e1[3];
    if (std::fabs(axis[2]) < 0.9) {
      e1[0] = -axis[1];
      e1[1] = axis[0];
      e1[2] = 0.0;
    } else {
      e1[0] = 1.0;
      e1[1] = 0.0;
      e1[2] = 0.0;
    }
    {
      const double d = e1[0] * axis[0] + e1[1] * axis[1] + e1[2] * axis[2];
      for (int c = 0; c < 3; ++c) e1[c] -= d * axis[c];
      const double n = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
      for (int c = 0; c < 3; ++c) e1[c] /= n;
    }
    const double e2[3] = {axis[1] * e1[2] - axis[2] * e1[1],
                          axis[2] * e1[0] - axis[0] * e1[2],
                          axis[0] * e1[1] - axis[1] * e1[0]};

    int mult = rng.poisson(params.mean_multiplicity[label]);
    if (mult < params.min_particles) mult = params.min_particles;
    JetRecord jet;
    jet.label = label;
    for (int p = 0; p < mult; ++p) {
      const double energy = std::max(0.05, rng.exponential(params.mean_energy));
      const double theta = rng.normal() * params.angular_spread[label];
      const double phi = rng.uniform(0.0, 6.283185307179586);
      const double ct = std::cos(theta), st = std::sin(theta);
      double dir[3];
      for (int c = 0; c < 3; ++c) {
        dir[c] = ct * axis[c] + st * (std::cos(phi) * e1[c] + std::sin(phi) * e2[c]);
      }
      jet.particles.emplace_back(energy, energy * dir[0], energy * dir[1],
                                 energy * dir[2]);
    }
    jets.push_back(std::move(jet));
  }
  return jets;
}

double pid_mass(int pid) {
  switch (std::abs(pid)) {
    case 211: return 0.13957039;   // charged pion
    case 321: return 0.493677;     // charged kaon
    case 130: return 0.497611;     // K0L
    case 310: return 0.497611;     // K0S
    case 2212: return 0.93827208;  // proton
    case 2112: return 0.93956542;  // neutron
    case 11: return 0.00051099895; // electron
    case 13: return 0.1056583755;  // muon
    case 22: return 0.0;           // photon
    default: return 0.0;
  }
}

JetRecord from_ptetaphipid(int label,
                           const std::vector<std::array<double, 4>>& rows) {
  JetRecord r;
  r.label = label;
  for (const auto& row : rows) {
    const double pt = row[0], eta = row[1], phi = row[2];
    const int pid = static_cast<int>(std::llround(row[3]));
    const double px = pt * std::cos(phi);
    const double py = pt * std::sin(phi);
    const double pz = pt * std::sinh(eta);
    const double m = pid_mass(pid);
    const double e = std::sqrt(px * px + py * py + pz * pz + m * m);
    r.particles.emplace_back(e, px, py, pz);
    r.scalars.push_back({static_cast<double>(pid)});
  }
  return r;
}

}  // namespace leq::data
