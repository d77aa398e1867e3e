#include <chrono>
#include <span>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "leq/data.hpp"
#include "leq/dressed.hpp"
#include "leq/model.hpp"
#include "leq/parallel.hpp"
#include "leq/qsim.hpp"
#include "leq/trainer.hpp"
#include "leq/verify.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;
constexpr int kExitVerification = 4;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const fs::path& path, const std::string& command,
                    const std::string& config_path, const std::string& digest,
                    std::uint64_t seed, const std::string& started,
                    const std::vector<std::string>& outputs) {
  ordered_json m;
  m["command"] = command;
  m["config_path"] = config_path;
  m["config_digest"] = digest;
  m["seed"] = seed;
  m["started_at"] = started;
  m["finished_at"] = now_iso8601();
  m["outputs"] = outputs;
  std::ofstream out(path);
  out << m.dump(2) << "\n";
}

/// Inline JSON (starts with '[' or '{') or @path / plain path to a JSON file.
json parse_json_arg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg[0] != '[' && arg[0] != '{') {
    const std::string path = arg[0] == '@' ? arg.substr(1) : arg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return json::parse(text);
}

struct RunConfig {
  std::uint64_t seed = 0;
  leq::ModelConfig model;
  leq::train::TrainConfig train;
  int min_particles = 10;
  int max_points = 10;
  std::string feature_mode = "hep8";
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
};

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str());
  RunConfig cfg;
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "seed" && k != "model" && k != "train" && k != "data") {
      throw std::invalid_argument("config: unknown key '" + k + "'");
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("model")) {
    cfg.model = leq::ModelConfig::from_json_text(j["model"].dump());
  }
  if (j.contains("train")) {
    cfg.train = leq::train::TrainConfig::from_json_text(j["train"].dump());
  }
  cfg.train.seed = cfg.seed;
  if (j.contains("data")) {
    for (const auto& item : j["data"].items()) {
      const std::string& k = item.key();
      if (k == "min_particles") cfg.min_particles = item.value().get<int>();
      else if (k == "max_points") cfg.max_points = item.value().get<int>();
      else if (k == "feature_mode") cfg.feature_mode = item.value().get<std::string>();
      else if (k == "split_ratios") {
        const auto r = item.value().get<std::vector<double>>();
        if (r.size() != 3) throw std::invalid_argument("config: split_ratios needs 3 entries");
        cfg.split_ratios = {r[0], r[1], r[2]};
      } else {
        throw std::invalid_argument("config: unknown key 'data." + k + "'");
      }
    }
  }
  if (cfg.feature_mode != "hep8" && cfg.feature_mode != "point4") {
    throw std::invalid_argument("config: feature_mode must be hep8 or point4");
  }
  return cfg;
}

/// Jet or image JSONL, detected per file from the first record.
std::vector<leq::data::JetGraph> ingest(const std::string& path,
                                        const RunConfig& cfg,
                                        leq::data::IngestStats& stats) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open " + path);
  std::string first;
  while (std::getline(probe, first)) {
    if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  const bool is_image = first.find("\"pixels\"") != std::string::npos;

  std::vector<leq::data::JetGraph> graphs;
  if (is_image) {
    const auto images = leq::data::parse_image_jsonl(path);
    stats.read = images.size();
    const auto mode = cfg.feature_mode == "hep8"
                          ? leq::data::ImageFeatureMode::kHep8
                          : leq::data::ImageFeatureMode::kPoint4;
    for (const auto& img : images) {
      try {
        auto g = leq::data::image_to_graph(img, cfg.max_points, mode);
        if (static_cast<int>(g.n_nodes()) < 2) {
          ++stats.skipped_min_particles;
          continue;
        }
        graphs.push_back(std::move(g));
        ++stats.parsed;
      } catch (const std::exception& e) {
        stats.errors.push_back({0, e.what()});
      }
    }
  } else {
    const auto records = leq::data::parse_jsonl(path);
    stats.read = records.size();
    for (const auto& r : records) {
      auto g = leq::data::build_jet_graph(r, cfg.min_particles);
      if (!g) {
        ++stats.skipped_min_particles;
        continue;
      }
      graphs.push_back(std::move(*g));
      ++stats.parsed;
    }
  }
  return graphs;
}

void write_roc_csv(const fs::path& path, std::span<const double> scores,
                   std::span<const int> labels) {
  std::ofstream out(path);
  out << "fpr,tpr\n";
  for (const auto& [fpr, tpr] : leq::train::roc_curve(scores, labels)) {
    out << fpr << "," << tpr << "\n";
  }
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, bool roc_csv) {
  const std::string started = now_iso8601();
  RunConfig cfg;
  try {
    cfg = parse_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<leq::data::JetGraph> graphs;
  leq::data::IngestStats stats;
  leq::data::DatasetSplit split;
  try {
    graphs = ingest(data_path, cfg, stats);
    if (graphs.size() < 20) {
      throw std::runtime_error("fewer than 20 usable graphs after ingestion");
    }
    std::vector<int> labels(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) labels[i] = graphs[i].label;
    split = leq::data::stratified_split(labels, cfg.split_ratios, cfg.seed);
  } catch (const std::exception& e) {
    std::cerr << "data-error: " << e.what() << "\n";
    return kExitData;
  }

  try {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "ingestion_report.json")
        << stats.to_json() << "\n";

    const std::string digest =
        leq::train::digest_hex(cfg.model.to_json() + cfg.train.to_json());
    const leq::train::ModelFactory factory = [&](std::uint64_t seed) {
      return leq::LorentzEqgnn(cfg.model, seed);
    };

    std::vector<std::string> outputs = {"ingestion_report.json"};
    if (cfg.train.folds > 1) {
      std::vector<int> pool = split.train;
      pool.insert(pool.end(), split.validation.begin(), split.validation.end());
      const leq::train::FoldObserver save_fold =
          [&](int fold, const leq::LorentzEqgnn& best) {
            const std::string name =
                "checkpoint_fold" + std::to_string(fold) + ".json";
            leq::save_checkpoint(best, (fs::path(out_dir) / name).string());
            outputs.push_back(name);
          };
      const auto report = leq::train::run_kfold(factory, graphs, pool,
                                                split.test, cfg.train, digest,
                                                save_fold);
      std::ofstream(fs::path(out_dir) / "metrics.json") << report.to_json() << "\n";
      outputs.push_back("metrics.json");
      if (roc_csv) {
        for (const auto& fold : report.folds) {
          const std::string name = "roc_fold" + std::to_string(fold.fold) + ".csv";
          write_roc_csv(fs::path(out_dir) / name, fold.scores, fold.labels);
          outputs.push_back(name);
        }
      }
    } else {
      leq::LorentzEqgnn model = factory(cfg.seed);
      const auto tr = leq::train::train_single(model, graphs, split.train,
                                               split.validation, split.test,
                                               cfg.train);
      leq::train::MetricsReport report;
      report.config_digest = digest;
      leq::train::FoldResult fr;
      fr.fold = 0;
      fr.epoch_best = tr.best_epoch;
      fr.accuracy = tr.test.accuracy;
      fr.auc = tr.test.auc;
      fr.loss = tr.test.loss;
      fr.rej03 = tr.test.rej03;
      fr.rej05 = tr.test.rej05;
      report.folds.push_back(fr);
      std::ofstream(fs::path(out_dir) / "metrics.json") << report.to_json() << "\n";
      leq::save_checkpoint(model, (fs::path(out_dir) / "checkpoint.json").string());
      outputs.push_back("metrics.json");
      outputs.push_back("checkpoint.json");
      if (roc_csv) {
        write_roc_csv(fs::path(out_dir) / "roc.csv", tr.test.scores,
                      tr.test.labels);
        outputs.push_back("roc.csv");
      }
    }
    write_manifest(fs::path(out_dir) / "run_manifest.json", "train", config_path,
                   digest, cfg.seed, started, outputs);
  } catch (const std::exception& e) {
    std::cerr << "training-error: " << e.what() << "\n";
    return kExitTraining;
  }
  return kExitOk;
}

int cmd_verify(const std::string& checkpoint_path, const std::string& suite,
               std::uint64_t seed) {
  leq::LorentzEqgnn model = [&]() {
    try {
      return leq::load_checkpoint(checkpoint_path);
    } catch (const std::exception& e) {
      std::cerr << "config-error: " << e.what() << "\n";
      std::exit(kExitConfig);
    }
  }();
  std::vector<leq::verify::CheckResult> results;
  try {
    results = leq::verify::run_suite(suite, model, seed);
  } catch (const std::exception& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return kExitConfig;
  }
  bool ok = true;
  for (const auto& r : results) {
    if (r.informational) {
      std::cout << r.name << ": " << r.deviation << " (informational)\n";
      continue;
    }
    std::cout << r.name << ": max deviation " << r.deviation << " (tolerance "
              << r.tolerance << ") " << (r.passed ? "PASS" : "FAIL") << "\n";
    if (!r.passed) {
      std::cerr << "verification-error: " << r.name << " deviation "
                << r.deviation << " exceeds " << r.tolerance << "\n";
      ok = false;
    }
  }
  return ok ? kExitOk : kExitVerification;
}

int cmd_circuit(const std::string& action, int n_qubits, int depth,
                const std::string& weights_arg, const std::string& angles_arg) {
  try {
    leq::Rng rng(0);
    leq::DressedCircuit circuit(n_qubits, depth, 0.0, rng);
    if (!weights_arg.empty()) {
      const json w = parse_json_arg(weights_arg);
      auto rows = w.get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != depth) {
        throw std::invalid_argument("weights must have q_depth rows");
      }
      auto& vals = circuit.weights.values();
      for (int k = 0; k < depth; ++k) {
        if (static_cast<int>(rows[k].size()) != n_qubits) {
          throw std::invalid_argument("weights rows must have n_qubits entries");
        }
        for (int q = 0; q < n_qubits; ++q) {
          vals[static_cast<std::size_t>(k) * n_qubits + q] = rows[k][q];
        }
      }
    }
    std::vector<double> angles(static_cast<std::size_t>(n_qubits), 0.0);
    if (!angles_arg.empty()) {
      angles = parse_json_arg(angles_arg).get<std::vector<double>>();
      if (static_cast<int>(angles.size()) != n_qubits) {
        throw std::invalid_argument("angles must have n_qubits entries");
      }
    }
    if (action == "dump") {
      const auto prog = circuit.gate_program(angles);
      ordered_json out = ordered_json::array();
      for (const auto& g : prog) {
        ordered_json jg;
        jg["kind"] = leq::qsim::gate_kind_name(g.kind);
        jg["qubits"] = g.arity() == 2
                           ? std::vector<int>{g.qubits[0], g.qubits[1]}
                           : std::vector<int>{g.qubits[0]};
        if (g.has_angle()) jg["angle"] = g.angle;
        out.push_back(jg);
      }
      std::cout << out.dump(2) << "\n";
    } else if (action == "run") {
      const auto exp = leq::dressed_forward_sample(circuit, angles);
      const auto prog = circuit.gate_program(angles);
      const auto state =
          leq::qsim::run_program(circuit.n_qubits, prog);
      ordered_json out;
      out["expectations"] = exp;
      ordered_json amps = ordered_json::array();
      for (std::size_t i = 0; i < state.dim(); ++i) {
        amps.push_back({state.amp(i).real(), state.amp(i).imag()});
      }
      out["amplitudes"] = amps;
      std::cout << out.dump(2) << "\n";
    } else {
      throw std::invalid_argument("circuit action must be dump or run");
    }
  } catch (const std::exception& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_synth(std::uint64_t seed, int per_class, const std::string& out_path,
              const leq::data::SynthParams& params) {
  const std::string started = now_iso8601();
  try {
    const auto jets = leq::data::synth_jets(seed, per_class, params);
    leq::data::write_jsonl(jets, out_path);
    write_manifest(out_path + ".manifest.json", "synth", "", "", seed, started,
                   {out_path});
  } catch (const std::exception& e) {
    std::cerr << "data-error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_convert(const std::string& format, const std::string& in_path,
                const std::string& out_path) {
  const std::string started = now_iso8601();
  if (format != "energyflow-npz-manifest") {
    std::cerr << "config-error: unknown format " << format << "\n";
    return kExitConfig;
  }
  try {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open " + in_path);
    std::vector<leq::data::JetRecord> converted;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw leq::data::SchemaError(lineno, std::string("invalid JSON: ") + e.what());
      }
      if (!j.contains("label") || !j.contains("particles")) {
        throw leq::data::SchemaError(lineno, "expected {label, particles}");
      }
      std::vector<std::array<double, 4>> rows;
      for (const auto& p : j["particles"]) {
        if (!p.is_array() || p.size() != 4) {
          throw leq::data::SchemaError(lineno,
                                       "particles rows must be [pt, eta, phi, pid]");
        }
        rows.push_back({p[0].get<double>(), p[1].get<double>(),
                        p[2].get<double>(), p[3].get<double>()});
      }
      converted.push_back(
          leq::data::from_ptetaphipid(j["label"].get<int>(), rows));
    }
    leq::data::write_jsonl(converted, out_path);
    write_manifest(out_path + ".manifest.json", "convert", "", "", 0, started,
                   {out_path});
  } catch (const std::exception& e) {
    std::cerr << "data-error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentz-equivariant quantum graph network engine"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

  auto* train = app.add_subcommand("train", "Train and evaluate a model");
  std::string config_path, data_path, out_dir;
  bool roc_csv = false;
  train->add_option("--config", config_path, "Config JSON")->required();
  train->add_option("--data", data_path, "Input JSONL")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_flag("--roc-csv", roc_csv, "Also write ROC curves as (fpr, tpr) CSV");

  auto* verify = app.add_subcommand("verify", "Run invariant suites");
  std::string checkpoint_path, suite = "all";
  std::uint64_t verify_seed = 1234;
  verify->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON")->required();
  verify->add_option("--suite", suite,
                     "lorentz|permutation|irc|gradients|unitarity|all");
  verify->add_option("--seed", verify_seed, "Corpus seed");

  auto* circuit = app.add_subcommand("circuit", "Inspect the quantum layer");
  std::string action;
  int qubits = 4, depth = 2;
  std::string weights_arg, angles_arg;
  circuit->add_option("action", action, "dump|run")->required();
  circuit->add_option("--qubits", qubits, "Number of qubits");
  circuit->add_option("--depth", depth, "Circuit depth");
  circuit->add_option("--weights", weights_arg, "Weight matrix (inline JSON or @file)");
  circuit->add_option("--angles", angles_arg, "Input angles (inline JSON or @file)");

  auto* synth = app.add_subcommand("synth", "Generate synthetic jets");
  std::uint64_t synth_seed = 0;
  int per_class = 100;
  std::string synth_out;
  leq::data::SynthParams sp;
  synth->add_option("--seed", synth_seed, "Seed")->required();
  synth->add_option("--per-class", per_class, "Jets per class")->required();
  synth->add_option("--out", synth_out, "Output JSONL")->required();
  synth->add_option("--mean0", sp.mean_multiplicity[0], "Class-0 mean multiplicity");
  synth->add_option("--mean1", sp.mean_multiplicity[1], "Class-1 mean multiplicity");
  synth->add_option("--spread0", sp.angular_spread[0], "Class-0 angular spread");
  synth->add_option("--spread1", sp.angular_spread[1], "Class-1 angular spread");

  auto* convert = app.add_subcommand("convert", "Convert external formats");
  std::string format, conv_in, conv_out;
  convert->add_option("--format", format, "energyflow-npz-manifest")->required();
  convert->add_option("--in", conv_in, "Input path")->required();
  convert->add_option("--out", conv_out, "Output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "config-error: " << e.what() << "\n";
    return kExitConfig;
  }
  leq::set_max_threads(threads);

  if (*train) return cmd_train(config_path, data_path, out_dir, roc_csv);
  if (*verify) return cmd_verify(checkpoint_path, suite, verify_seed);
  if (*circuit) return cmd_circuit(action, qubits, depth, weights_arg, angles_arg);
  if (*synth) return cmd_synth(synth_seed, per_class, synth_out, sp);
  if (*convert) return cmd_convert(format, conv_in, conv_out);
  return kExitConfig;
}
