#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leq/minkowski.hpp"

namespace leq::data {

/// One jet as read from the interchange JSONL: a label, particle 4-momenta
/// and optional per-particle scalar lists (PID, charge, ...).
struct JetRecord {
  int label = 0;
  std::vector<FourVector> particles;
  std::vector<std::vector<double>> scalars;  // empty or one list per particle
};

/// Fully connected particle-cloud graph; node order preserves record order.
struct JetGraph {
  int label = 0;
  std::vector<FourVector> momenta;
  std::vector<std::vector<double>> scalars;  // per node, may be empty
  std::size_t n_nodes() const { return momenta.size(); }
};

struct ImageRecord {
  int label = 0;
  std::vector<std::vector<double>> pixels;  // row-major grid
};

struct IngestError {
  int line = 0;
  std::string message;
};

struct IngestStats {
  std::size_t read = 0;
  std::size_t parsed = 0;
  std::size_t skipped_min_particles = 0;
  std::vector<IngestError> errors;
  std::string to_json() const;
};

/// Schema violation carrying the 1-based line number and field path.
struct SchemaError : std::runtime_error {
  SchemaError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

std::vector<JetRecord> parse_jsonl(const std::string& path);
void write_jsonl(const std::vector<JetRecord>& records, const std::string& path);

std::vector<ImageRecord> parse_image_jsonl(const std::string& path);

/// Fully connected graph when the record has at least min_particles nodes;
/// nullopt marks a skip (counted by callers, not an error).
std::optional<JetGraph> build_jet_graph(const JetRecord& r, int min_particles);

enum class ImageFeatureMode { kHep8, kPoint4 };

/// Extracts up to max_points pixels above 1% of the image maximum, brightest
/// first, and lifts them to graph nodes with coordinates
/// (e=intensity, px=x_norm, py=y_norm, pz=0).
/// hep8 node scalars: intensity, x_norm, y_norm, radial distance and azimuth
/// about the image center, log-compressed intensity, intensity share of the
/// image total, and brightness rank percentile.
/// point4 node scalars: x_norm, y_norm, intensity, 0.
JetGraph image_to_graph(const ImageRecord& image, int max_points,
                        ImageFeatureMode mode);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

/// Deterministic stratified split; per-class proportions land within one
/// sample of the ratios. Requires >= 10 samples per class.
DatasetSplit stratified_split(const std::vector<int>& labels,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed);

struct SynthParams {
  double mean_multiplicity[2] = {15.0, 25.0};
  double angular_spread[2] = {0.05, 0.15};
  double mean_energy = 25.0;  // GeV
  int min_particles = 10;
};

/// Deterministic synthetic jets: collimated massless sprays about a random
/// axis with class-dependent multiplicity and angular spread, balanced labels.
std::vector<JetRecord> synth_jets(std::uint64_t seed, int n_per_class,
                                  const SynthParams& params = {});

/// EnergyFlow-style conversion: per-particle (pt, eta, phi, pid) rows to
/// 4-momenta with a PID mass table; pid is kept as a node scalar.
JetRecord from_ptetaphipid(int label,
                           const std::vector<std::array<double, 4>>& rows);

double pid_mass(int pid);

}  // namespace leq::data
