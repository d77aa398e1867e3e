#include "leq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leq/dressed.hpp"
#include "leq/lgeqb.hpp"
#include "leq/minkowski.hpp"
#include "leq/ops.hpp"
#include "leq/parallel.hpp"
#include "leq/qsim.hpp"
#include "leq/reference_sim.hpp"
#include "leq/rng.hpp"

namespace leq::verify {

namespace {

data::JetGraph boosted(const data::JetGraph& jet, const LorentzTransform& t) {
  data::JetGraph out = jet;
  for (auto& p : out.momenta) p = t.apply(p);
  return out;
}

std::array<double, 2> eval_logits(const LorentzEqgnn& model,
                                  const data::JetGraph& jet) {
  diff::Tape tape;
  const auto out = model.forward(tape, jet, false, 0);
  return {out.logits.values()[0], out.logits.values()[1]};
}

double rel_dev(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double scale =
      std::max({std::fabs(a[0]), std::fabs(a[1]), 1e-12});
  return std::max(std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1])) / scale;
}

}  // namespace

std::vector<data::JetGraph> random_graph_corpus(std::uint64_t seed, int count,
                                                int n_min, int n_max) {
  std::vector<data::JetGraph> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int g = 0; g < count; ++g) {
    Rng rng(derive_seed(seed, "corpus", static_cast<std::uint64_t>(g)));
    const int n = n_min + static_cast<int>(rng.uniform_int(
                              static_cast<std::uint64_t>(n_max - n_min + 1)));
    data::JetGraph jet;
    jet.label = g % 2;
    const double cz = rng.uniform(-1.0, 1.0);
    const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    const double aphi = rng.uniform(0.0, 6.283185307179586);
    const double axis[3] = {sz * std::cos(aphi), sz * std::sin(aphi), cz};
    for (int p = 0; p < n; ++p) {
      const double energy = std::max(0.05, rng.exponential(25.0));
      const double theta = rng.normal() * 0.1;
      const double phi = rng.uniform(0.0, 6.283185307179586);
      // perturb around the axis in an orthonormal frame
      double e1[3] = {-axis[1], axis[0], 0.0};
      double nrm = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1]);
      if (nrm < 1e-9) {
        e1[0] = 1.0;
        e1[1] = 0.0;
        nrm = 1.0;
      }
      e1[0] /= nrm;
      e1[1] /= nrm;
      const double e2[3] = {axis[1] * e1[2] - axis[2] * e1[1],
                            axis[2] * e1[0] - axis[0] * e1[2],
                            axis[0] * e1[1] - axis[1] * e1[0]};
      const double ct = std::cos(theta), st = std::sin(theta);
      double dir[3];
      for (int c = 0; c < 3; ++c) {
        dir[c] =
            ct * axis[c] + st * (std::cos(phi) * e1[c] + std::sin(phi) * e2[c]);
      }
      jet.momenta.emplace_back(energy, energy * dir[0], energy * dir[1],
                               energy * dir[2]);
    }
    out.push_back(std::move(jet));
  }
  return out;
}

std::vector<CheckResult> suite_lorentz(const LorentzEqgnn& model,
                                       std::uint64_t seed, int n_graphs,
                                       int n_transforms, double max_rapidity) {
  const auto corpus = random_graph_corpus(seed, n_graphs, 10, 30);
  std::vector<double> logit_dev(corpus.size(), 0.0);
  std::vector<double> coord_dev(corpus.size(), 0.0);

  parallel_for(corpus.size(), [&](std::size_t g) {
    const data::JetGraph& jet = corpus[g];
    const auto base = eval_logits(model, jet);

    // block-level coordinate update on the untransformed graph
    auto& blocks = const_cast<LorentzEqgnn&>(model).blocks();
    LgeqbParams& block = blocks.front();
    const EdgeIndex edges = make_full_edges(static_cast<int>(jet.n_nodes()));
    diff::Tape tape0;
    const BlockState s0 = model.embed_inputs(tape0, jet);
    const diff::Tensor feats0 = edge_features(tape0, s0.x, s0.h, edges);
    const diff::Tensor msgs0 = compute_messages(tape0, block, feats0);
    const diff::Tensor x1 = update_coordinates(tape0, block, s0.x, msgs0, edges);

    for (int t = 0; t < n_transforms; ++t) {
      const LorentzTransform lt = random_lorentz(
          derive_seed(seed, "transform", g * 1000 + t), max_rapidity);
      const data::JetGraph bj = boosted(jet, lt);
      const auto moved = eval_logits(model, bj);
      logit_dev[g] = std::max(logit_dev[g], rel_dev(base, moved));

      diff::Tape tape1;
      const BlockState s1 = model.embed_inputs(tape1, bj);
      const diff::Tensor feats1 = edge_features(tape1, s1.x, s1.h, edges);
      const diff::Tensor msgs1 = compute_messages(tape1, block, feats1);
      const diff::Tensor x1b =
          update_coordinates(tape1, block, s1.x, msgs1, edges);
      // compare Lambda * update(x) against update(Lambda x)
      double scale = 1e-12;
      for (const double v : x1b.values()) scale = std::max(scale, std::fabs(v));
      double worst = 0.0;
      for (std::size_t r = 0; r < x1.rows(); ++r) {
        const FourVector rotated = lt.apply(
            {x1.at(r, 0), x1.at(r, 1), x1.at(r, 2), x1.at(r, 3)});
        for (int c = 0; c < 4; ++c) {
          worst = std::max(worst, std::fabs(rotated[c] - x1b.at(r, c)));
        }
      }
      coord_dev[g] = std::max(coord_dev[g], worst / scale);
    }
  });

  const double worst_logit = *std::max_element(logit_dev.begin(), logit_dev.end());
  const double worst_coord = *std::max_element(coord_dev.begin(), coord_dev.end());
  return {
      {"lorentz.logit_invariance", worst_logit, 1e-6, worst_logit < 1e-6},
      {"lorentz.coordinate_equivariance", worst_coord, 1e-6, worst_coord < 1e-6},
  };
}

std::vector<CheckResult> suite_permutation(const LorentzEqgnn& model,
                                           std::uint64_t seed, int n_graphs) {
  const auto corpus = random_graph_corpus(seed, n_graphs, 10, 30);
  std::vector<double> devs(corpus.size(), 0.0);
  parallel_for(corpus.size(), [&](std::size_t g) {
    const data::JetGraph& jet = corpus[g];
    const auto base = eval_logits(model, jet);
    Rng rng(derive_seed(seed, "perm", g));
    std::vector<int> perm(jet.n_nodes());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm);
    data::JetGraph shuffled = jet;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.momenta[i] = jet.momenta[static_cast<std::size_t>(perm[i])];
      if (!jet.scalars.empty()) {
        shuffled.scalars[i] = jet.scalars[static_cast<std::size_t>(perm[i])];
      }
    }
    const auto moved = eval_logits(model, shuffled);
    devs[g] = std::max(std::fabs(base[0] - moved[0]),
                       std::fabs(base[1] - moved[1]));
  });
  const double worst = *std::max_element(devs.begin(), devs.end());
  return {{"permutation.logit_invariance", worst, 1e-9, worst < 1e-9}};
}

std::vector<CheckResult> suite_irc(const LorentzEqgnn& model,
                                   std::uint64_t seed, int n_jets) {
  const auto corpus = random_graph_corpus(seed, n_jets, 10, 16);
  auto& blocks = const_cast<LorentzEqgnn&>(model).blocks();
  LgeqbParams& block = blocks.front();

  double worst_ratio_err = 0.0;   // |ratio/z - 1| must stay within [0.5, 2]
  double worst_soft_norm = 0.0;   // weighted-message norm at z = 1e-4
  double worst_residual = 0.0;    // collinear additivity diagnostic

  for (std::size_t g = 0; g < corpus.size(); ++g) {
    const data::JetGraph& jet = corpus[g];
    const EdgeIndex edges = make_full_edges(static_cast<int>(jet.n_nodes()));
    diff::Tape tape;
    const BlockState s = model.embed_inputs(tape, jet);
    const diff::Tensor base_pref = irc_prefactors(tape, s.x, edges);

    for (const double z : {1e-2, 1e-4}) {
      data::JetGraph soft = jet;
      const int soft_node = 1;
      soft.momenta[soft_node] = soft.momenta[soft_node] * z;
      diff::Tape tape2;
      const BlockState s2 = model.embed_inputs(tape2, soft);
      const diff::Tensor pref = irc_prefactors(tape2, s2.x, edges);
      const diff::Tensor msgs =
          compute_messages(tape2, block, edge_features(tape2, s2.x, s2.h, edges));
      const diff::Tensor scaled = diff::row_broadcast_mul(tape2, msgs, pref);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges.dst[e] != soft_node) continue;
        const double ratio = pref.values()[e] / base_pref.values()[e];
        const double normalized = ratio / z;
        worst_ratio_err = std::max(
            worst_ratio_err, std::max(normalized - 2.0, 0.5 - normalized));
        if (z == 1e-4) {
          for (std::size_t c = 0; c < scaled.cols(); ++c) {
            worst_soft_norm =
                std::max(worst_soft_norm, std::fabs(scaled.at(e, c)));
          }
        }
      }
    }
    if (g < 5) {
      const double res = collinear_additivity_residual(
          block, {s.x, s.h}, 0, 1, 0.5, 1e-4, model.config().irc_safe);
      worst_residual = std::max(worst_residual, res);
    }
  }
  // prefactor scales linearly when normalized ratio lies in [0.5, 2]
  std::vector<CheckResult> out;
  out.push_back({"irc.prefactor_linear_scaling", worst_ratio_err, 0.0,
                 worst_ratio_err <= 0.0});
  out.push_back({"irc.soft_message_norm", worst_soft_norm, 1e-2,
                 worst_soft_norm < 1e-2});
  out.push_back({"irc.collinear_additivity_residual", worst_residual, 0.0, true,
                 /*informational=*/true});
  return out;
}

std::vector<CheckResult> suite_gradients(const LorentzEqgnn& model,
                                         std::uint64_t seed) {
  // (a) parameter-shift vs central finite differences on random circuits
  double worst_circuit = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    Rng rng(derive_seed(seed, "grad_circuit", static_cast<std::uint64_t>(trial)));
    const int nq = 4;
    const int depth = 1 + static_cast<int>(rng.uniform_int(3));
    const int n_angles = 3 + static_cast<int>(rng.uniform_int(4));
    std::vector<double> angles(static_cast<std::size_t>(n_angles));
    for (double& a : angles) a = rng.uniform(-1.5, 1.5);

    // random structure: each angle feeds one rotation (occasionally a CRZ or a
    // shared pair), interleaved with Hadamards and CNOTs
    struct Slot {
      int kind;  // 0 rx, 1 ry, 2 rz, 3 crz, 4 shared rx+ry pair
      int q0, q1;
    };
    std::vector<Slot> slots;
    for (int a = 0; a < n_angles; ++a) {
      Slot s;
      s.kind = static_cast<int>(rng.uniform_int(5));
      s.q0 = static_cast<int>(rng.uniform_int(nq));
      s.q1 = (s.q0 + 1 + static_cast<int>(rng.uniform_int(nq - 1))) % nq;
      slots.push_back(s);
    }
    std::vector<int> cnots;
    for (int d = 0; d < depth; ++d) cnots.push_back(static_cast<int>(rng.uniform_int(nq - 1)));

    const qsim::ProgramBuilder builder =
        [&](std::span<const double> a) -> std::vector<qsim::GateOp> {
      std::vector<qsim::GateOp> prog;
      for (int q = 0; q < nq; ++q) prog.push_back(qsim::GateOp::h(q));
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const Slot& s = slots[i];
        switch (s.kind) {
          case 0: prog.push_back(qsim::GateOp::rx(s.q0, a[i])); break;
          case 1: prog.push_back(qsim::GateOp::ry(s.q0, a[i])); break;
          case 2: prog.push_back(qsim::GateOp::rz(s.q0, a[i])); break;
          case 3: prog.push_back(qsim::GateOp::crz(a[i], s.q0, s.q1)); break;
          case 4:
            prog.push_back(qsim::GateOp::rx(s.q0, a[i]));
            prog.push_back(qsim::GateOp::ry(s.q0, a[i]));
            break;
        }
        if (i < cnots.size()) {
          prog.push_back(qsim::GateOp::cnot(cnots[i], (cnots[i] + 1) % nq));
        }
      }
      return prog;
    };

    std::vector<int> observables = {0, 1, 2, 3};
    const auto analytic =
        qsim::param_shift_grad(nq, builder, angles, observables);
    const double h = 1e-5;
    for (std::size_t k = 0; k < angles.size(); ++k) {
      std::vector<double> a2(angles);
      a2[k] = angles[k] + h;
      const auto sp = qsim::run_program(nq, builder(a2));
      a2[k] = angles[k] - h;
      const auto sm = qsim::run_program(nq, builder(a2));
      for (std::size_t o = 0; o < observables.size(); ++o) {
        const double fd =
            (sp.expect_z(observables[o]) - sm.expect_z(observables[o])) /
            (2 * h);
        worst_circuit = std::max(worst_circuit, std::fabs(fd - analytic[k][o]));
      }
    }
  }

  // (b) end-to-end loss gradient vs finite differences on a 5-node jet
  const auto corpus = random_graph_corpus(derive_seed(seed, "grad_jet"), 1, 5, 5);
  const data::JetGraph& jet = corpus[0];
  const ModelConfig cfg = model.config();
  LorentzEqgnn probe(cfg, derive_seed(seed, "grad_model"));
  const std::vector<double> theta = probe.flat_params();

  auto loss_at = [&](std::span<const double> params) {
    LorentzEqgnn m(cfg, 0);
    m.set_flat_params(params);
    diff::Tape tape;
    const auto out = m.forward(tape, jet, false, 0);
    auto [loss, probs] = diff::softmax_xent(tape, out.logits, {jet.label});
    return loss.values()[0];
  };
  probe.zero_grads();
  diff::Tape tape;
  const auto out = probe.forward(tape, jet, false, 0);
  auto [loss, probs] = diff::softmax_xent(tape, out.logits, {jet.label});
  tape.backward(loss);
  const std::vector<double> analytic = probe.flat_grads();

  double worst_model = 0.0;
  const double h = 1e-5;
  std::vector<double> params = theta;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    const double lp = loss_at(params);
    params[i] = orig - h;
    const double lm = loss_at(params);
    params[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    const double rel =
        std::fabs(analytic[i] - fd) / std::max(std::fabs(fd), 1e-6);
    worst_model = std::max(worst_model, rel);
  }

  return {
      {"gradients.param_shift_vs_fd", worst_circuit, 1e-6, worst_circuit < 1e-6},
      {"gradients.model_loss_vs_fd", worst_model, 1e-4, worst_model < 1e-4},
  };
}

std::vector<CheckResult> suite_unitarity(std::uint64_t seed) {
  double worst_gate = 0.0;
  // every gate kind against the dense reference on 2- and 3-qubit registers
  for (const int nq : {2, 3}) {
    for (int kind = 0; kind < 7; ++kind) {
      for (int trial = 0; trial < 6; ++trial) {
        Rng rng(derive_seed(seed, "unitarity",
                            static_cast<std::uint64_t>(nq * 100 + kind * 10 + trial)));
        qsim::GateOp g{static_cast<qsim::GateKind>(kind),
                       {0, 1},
                       rng.uniform(-3.0, 3.0)};
        g.qubits[0] = static_cast<int>(rng.uniform_int(nq));
        g.qubits[1] = (g.qubits[0] + 1 + static_cast<int>(rng.uniform_int(nq - 1))) % nq;
        // random normalized state via a random preparation program
        std::vector<qsim::GateOp> prep;
        for (int q = 0; q < nq; ++q) {
          prep.push_back(qsim::GateOp::ry(q, rng.uniform(-3.0, 3.0)));
          prep.push_back(qsim::GateOp::rz(q, rng.uniform(-3.0, 3.0)));
        }
        prep.push_back(qsim::GateOp::cnot(0, 1));

        std::vector<qsim::GateOp> full = prep;
        full.push_back(g);
        const auto fast = qsim::run_program(nq, full);
        const auto dense = reference::run_program_dense(nq, full);
        double dev = 0.0;
        for (std::size_t i = 0; i < dense.size(); ++i) {
          dev = std::max(dev, std::abs(fast.amp(i) - dense[i]));
        }
        worst_gate = std::max(worst_gate, dev);
      }
    }
  }

  double worst_drift = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(derive_seed(seed, "norm_audit", static_cast<std::uint64_t>(trial)));
    const int nq = 2 + static_cast<int>(rng.uniform_int(5));
    std::vector<qsim::GateOp> prog;
    for (int g = 0; g < 50; ++g) {
      const int kind = static_cast<int>(rng.uniform_int(7));
      const int q0 = static_cast<int>(rng.uniform_int(nq));
      const int q1 = (q0 + 1 + static_cast<int>(rng.uniform_int(nq - 1))) % nq;
      const double angle = rng.uniform(-3.0, 3.0);
      switch (static_cast<qsim::GateKind>(kind)) {
        case qsim::GateKind::kH: prog.push_back(qsim::GateOp::h(q0)); break;
        case qsim::GateKind::kRX: prog.push_back(qsim::GateOp::rx(q0, angle)); break;
        case qsim::GateKind::kRY: prog.push_back(qsim::GateOp::ry(q0, angle)); break;
        case qsim::GateKind::kRZ: prog.push_back(qsim::GateOp::rz(q0, angle)); break;
        case qsim::GateKind::kCNOT: prog.push_back(qsim::GateOp::cnot(q0, q1)); break;
        case qsim::GateKind::kCRZ: prog.push_back(qsim::GateOp::crz(angle, q0, q1)); break;
        case qsim::GateKind::kSWAP: prog.push_back(qsim::GateOp::swap(q0, q1)); break;
      }
    }
    const auto s = qsim::run_program(nq, prog);
    worst_drift = std::max(worst_drift, std::fabs(s.norm2() - 1.0));
  }

  return {
      {"unitarity.gate_vs_dense_matrix", worst_gate, 1e-12, worst_gate < 1e-12},
      {"unitarity.norm_drift_50_gates", worst_drift, 1e-12, worst_drift < 1e-12},
  };
}

std::vector<CheckResult> run_suite(const std::string& name,
                                   const LorentzEqgnn& model,
                                   std::uint64_t seed) {
  if (name == "lorentz") return suite_lorentz(model, seed);
  if (name == "permutation") return suite_permutation(model, seed);
  if (name == "irc") return suite_irc(model, seed);
  if (name == "gradients") return suite_gradients(model, seed);
  if (name == "unitarity") return suite_unitarity(seed);
  if (name == "all") {
    std::vector<CheckResult> out;
    for (const char* s : {"lorentz", "permutation", "irc", "gradients", "unitarity"}) {
      const auto part = run_suite(s, model, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw std::invalid_argument("unknown suite: " + name);
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.informational && !r.passed) return false;
  }
  return true;
}

}  // namespace leq::verify
