// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "leq/data.hpp"
#include "leq/metrics.hpp"
#include "leq/model.hpp"
#include "leq/optimizer.hpp"
#include "leq/parallel.hpp"
#include "leq/rng.hpp"
#include "leq/trainer.hpp"
#include "leq/verify.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Criterion {
  int id;
  std::string name;
  bool passed;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Criterion> g_results;
std::ofstream g_report_file;

void emit(const std::string& line) {
  std::cout << line << std::endl;
  if (g_report_file.is_open()) g_report_file << line << "\n" << std::flush;
}

void report(int id, const std::string& name, bool passed,
            const std::string& detail, double seconds, bool skipped = false) {
  g_results.push_back({id, name, passed, skipped, detail, seconds});
  std::ostringstream os;
  os << "[" << (id < 10 ? " " : "") << id << "] "
     << (skipped ? "SKIP" : (passed ? "PASS" : "FAIL")) << " " << name << " ("
     << detail << ") [" << std::fixed << std::setprecision(1) << seconds
     << "s]";
  emit(os.str());
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<leq::data::JetGraph> graphs_from(const std::vector<leq::data::JetRecord>& jets) {
  std::vector<leq::data::JetGraph> graphs;
  for (const auto& j : jets) {
    auto g = leq::data::build_jet_graph(j, 10);
    if (g) graphs.push_back(std::move(*g));
  }
  return graphs;
}

void criterion_1_2_lorentz() {
  const auto t0 = Clock::now();
  const leq::LorentzEqgnn model(leq::ModelConfig{}, 12345);
  const auto results = leq::verify::suite_lorentz(model, 777, 100, 20, 2.0);
  const double elapsed = seconds_since(t0);
  const auto& logits = results[0];
  const auto& coords = results[1];
  {
    std::ostringstream os;
    os << "max rel dev " << logits.deviation << " < 1e-6 over 100 graphs x 20 transforms";
    report(1, "lorentz invariance of eval-mode logits",
           logits.passed && elapsed < 120.0, os.str(), elapsed);
  }
  {
    std::ostringstream os;
    os << "max rel dev " << coords.deviation << " < 1e-6";
    report(2, "block-level coordinate equivariance", coords.passed, os.str(),
           elapsed);
  }
}

void criterion_3_permutation() {
  const auto t0 = Clock::now();
  const leq::LorentzEqgnn model(leq::ModelConfig{}, 54321);
  const auto results = leq::verify::suite_permutation(model, 778, 100);
  std::ostringstream os;
  os << "max dev " << results[0].deviation << " < 1e-9";
  report(3, "permutation invariance of logits", results[0].passed, os.str(),
         seconds_since(t0));
}

void criterion_4_irc() {
  const auto t0 = Clock::now();
  leq::ModelConfig cfg;
  cfg.irc_safe = true;
  const leq::LorentzEqgnn model(cfg, 999);
  const auto results = leq::verify::suite_irc(model, 779, 50);
  const auto& scaling = results[0];
  std::ostringstream os;
  os << "prefactor(z)/prefactor(1) within [0.5z, 2z] at z in {1e-2, 1e-4}, "
     << "worst excess " << scaling.deviation;
  report(4, "infrared-safe prefactor scaling", scaling.passed, os.str(),
         seconds_since(t0));
}

void criterion_5_simulator() {
  const auto t0 = Clock::now();
  const auto results = leq::verify::suite_unitarity(780);
  const bool ok = results[0].passed && results[1].passed;
  std::ostringstream os;
  os << "gate-vs-dense max dev " << results[0].deviation
     << " < 1e-12; norm drift " << results[1].deviation << " < 1e-12";
  report(5, "simulator conformance to the gate matrices", ok, os.str(),
         seconds_since(t0));
}

void criterion_6_gradients() {
  const auto t0 = Clock::now();
  leq::ModelConfig cfg;
  cfg.n_layers = 2;  // routes gradients through the coordinate chain as well
  const leq::LorentzEqgnn model(cfg, 31);
  const auto results = leq::verify::suite_gradients(model, 781);
  const double elapsed = seconds_since(t0);
  const bool ok = results[0].passed && results[1].passed && elapsed < 300.0;
  std::ostringstream os;
  os << "param-shift vs FD " << results[0].deviation
     << " < 1e-6; model loss vs FD rel " << results[1].deviation << " < 1e-4";
  report(6, "gradient integrity", ok, os.str(), elapsed);
}

void criterion_7_metrics() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream os;

  leq::Rng rng(78123);
  double worst_auc = 0.0, worst_rej = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(181));
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      scores.push_back(std::round(rng.uniform() * 25) / 25.0);
      labels.push_back((i < 2) ? i : static_cast<int>(rng.uniform_int(2)));
    }
    worst_auc = std::max(worst_auc,
                         std::fabs(leq::train::roc_auc(scores, labels) -
                                   oracles::pairwise_auc(scores, labels)));
    for (const double eps : {0.3, 0.5}) {
      const double sweep = oracles::sweep_eps_b(scores, labels, eps);
      const auto got = leq::train::background_rejection(scores, labels, eps);
      if (sweep == 0.0) {
        if (!got.infinite) worst_rej = 1.0;
      } else {
        worst_rej = std::max(worst_rej, std::fabs(got.value - 1.0 / sweep));
      }
    }
  }
  ok = ok && worst_auc < 1e-12 && worst_rej < 1e-9;

  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 10000; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(static_cast<int>(rng.uniform_int(2)));
  }
  const auto rej = leq::train::background_rejection(scores, labels, 0.3);
  const bool random_ok =
      !rej.infinite && std::fabs(rej.value - 1.0 / 0.3) < 0.15 * (1.0 / 0.3);
  ok = ok && random_ok;

  os << "auc vs pairwise oracle dev " << worst_auc
     << "; rejection vs sweep dev " << worst_rej << "; random-score rej03 "
     << rej.value << " within 15% of 3.33";
  report(7, "metric oracles", ok, os.str(), seconds_since(t0));
}

void criterion_8_schedule() {
  const auto t0 = Clock::now();
  leq::train::TrainConfig cfg;  // defaults: warmup 5, t0 4, t_mult 2
  bool ok = std::fabs(leq::train::lr_at(4, cfg) - 1e-3) < 1e-15 &&
            std::fabs(leq::train::lr_at(5, cfg) - 1e-3) < 1e-15;
  for (const int boundary : {4, 12, 28}) {
    ok = ok && std::fabs(leq::train::lr_at(5 + boundary, cfg) - 1e-3) < 1e-15;
    ok = ok && leq::train::lr_at(5 + boundary - 1, cfg) < 1e-3;
  }
  report(8, "learning-rate schedule anchors", ok,
         "lr(4) = lr(5) = 1e-3; restarts at post-warmup epochs 4, 12, 28",
         seconds_since(t0));
}

leq::train::TrainConfig desk_config(int epochs) {
  leq::train::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = 42;
  cfg.folds = 1;
  return cfg;
}

void criterion_9_learning() {
  const auto t0 = Clock::now();
  const auto jets = leq::data::synth_jets(42, 500);
  auto graphs = graphs_from(jets);
  std::vector<int> labels(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) labels[i] = graphs[i].label;
  const auto split = leq::data::stratified_split(labels, {0.8, 0.1, 0.1}, 42);

  leq::LorentzEqgnn model(leq::ModelConfig{}, 42);
  const auto tr = leq::train::train_single(model, graphs, split.train,
                                           split.validation, split.test,
                                           desk_config(20));
  const double elapsed = seconds_since(t0);
  const bool ok =
      tr.test.accuracy >= 0.90 && tr.test.auc >= 0.95 && elapsed < 900.0;
  std::ostringstream os;
  os << "test accuracy " << tr.test.accuracy << " >= 0.90; auc " << tr.test.auc
     << " >= 0.95; 800/100/100 jets, 20 epochs";
  report(9, "end-to-end learning at desk scale", ok, os.str(), elapsed);
}

void criterion_10_quark_gluon() {
  const auto t0 = Clock::now();
  const char* path = std::getenv("LEQ_QG_DATA");
  if (path == nullptr || !fs::exists(path)) {
    report(10, "quark-gluon reproduction (best effort)", true,
           "no converted dataset at $LEQ_QG_DATA; environment-dependent",
           seconds_since(t0), /*skipped=*/true);
    return;
  }
  try {
    const auto records = leq::data::parse_jsonl(path);
    auto graphs = graphs_from(records);
    std::vector<int> pool;
    for (std::size_t i = 0; i < graphs.size() && pool.size() < 1000; ++i) {
      pool.push_back(static_cast<int>(i));
    }
    leq::train::TrainConfig cfg;
    cfg.epochs = 50;
    cfg.seed = 42;
    cfg.folds = 5;
    const leq::train::ModelFactory factory = [](std::uint64_t seed) {
      return leq::LorentzEqgnn(leq::ModelConfig{}, seed);
    };
    const auto report_json = leq::train::run_kfold(factory, graphs, pool, {},
                                                   cfg, "acceptance10");
    double acc = 0, auc = 0;
    for (const auto& f : report_json.folds) {
      acc += f.accuracy;
      auc += f.auc;
    }
    acc /= report_json.folds.size();
    auc /= report_json.folds.size();
    const bool ok = acc >= 0.69 && acc <= 0.79 && auc >= 0.82 && auc <= 0.92;
    std::ostringstream os;
    os << "5-fold mean accuracy " << acc << " in [0.69, 0.79]; auc " << auc
       << " in [0.82, 0.92]";
    report(10, "quark-gluon reproduction (best effort)", ok, os.str(),
           seconds_since(t0));
  } catch (const std::exception& e) {
    report(10, "quark-gluon reproduction (best effort)", false, e.what(),
           seconds_since(t0));
  }
}

void criterion_11_determinism() {
  const auto t0 = Clock::now();
  const auto jets = leq::data::synth_jets(9, 40);
  auto graphs = graphs_from(jets);
  std::vector<int> train_idx, val_idx;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    (i % 5 == 0 ? val_idx : train_idx).push_back(static_cast<int>(i));
  }
  leq::train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.warmup_epochs = 1;
  cfg.batch_size = 8;
  cfg.seed = 31;

  auto run_metrics = [&]() {
    leq::LorentzEqgnn model(leq::ModelConfig{}, cfg.seed);
    const auto tr = leq::train::train_single(model, graphs, train_idx, val_idx,
                                             val_idx, cfg);
    leq::train::MetricsReport rep;
    rep.config_digest = "determinism";
    rep.folds.push_back({0, tr.best_epoch, tr.test.accuracy, tr.test.auc,
                         tr.test.loss, tr.test.rej03, tr.test.rej05});
    return rep.to_json();
  };

  leq::set_max_threads(1);
  const std::string serial_a = run_metrics();
  const std::string serial_b = run_metrics();
  leq::set_max_threads(0);
  const std::string parallel = run_metrics();

  const bool serial_identical = serial_a == serial_b;
  // per-jet accumulation order is fixed, so parallel runs match bit-for-bit;
  // the stated contract only requires 1e-9 agreement
  bool parallel_close = parallel == serial_a;
  if (!parallel_close) {
    const auto ja = nlohmann::json::parse(serial_a);
    const auto jp = nlohmann::json::parse(parallel);
    parallel_close =
        std::fabs(ja["mean"]["accuracy"].get<double>() -
                  jp["mean"]["accuracy"].get<double>()) < 1e-9 &&
        std::fabs(ja["mean"]["loss"].get<double>() -
                  jp["mean"]["loss"].get<double>()) < 1e-9 &&
        std::fabs(ja["mean"]["auc"].get<double>() -
                  jp["mean"]["auc"].get<double>()) < 1e-9;
  }
  std::ostringstream os;
  os << "single-thread bit-identical: " << (serial_identical ? "yes" : "no")
     << "; parallel within 1e-9: " << (parallel_close ? "yes" : "no");
  report(11, "training determinism", serial_identical && parallel_close,
         os.str(), seconds_since(t0));
}

}  // namespace

int main() {
  g_report_file.open("acceptance_report.txt");
  emit("acceptance suite");
  criterion_1_2_lorentz();
  criterion_3_permutation();
  criterion_4_irc();
  criterion_5_simulator();
  criterion_6_gradients();
  criterion_7_metrics();
  criterion_8_schedule();
  criterion_9_learning();
  criterion_10_quark_gluon();
  criterion_11_determinism();

  bool required_ok = true;
  bool best_effort_ok = true;
  for (const auto& c : g_results) {
    if (c.id == 10) {
      best_effort_ok = c.passed || c.skipped;
    } else {
      required_ok = required_ok && c.passed;
    }
  }
  if (!best_effort_ok) {
    emit("note: criterion 10 is best-effort and environment-dependent; "
         "it does not gate the suite when criteria 1-9 and 11 pass");
  }
  emit(required_ok ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL");
  return required_ok ? 0 : 1;
}
