#include "leq/dressed.hpp"

#include "leq/ops.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>

namespace leq {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

using Amps = std::vector<std::complex<double>>;

/// Per-circuit evaluator with prefix-state caches so that parameter-shift
/// re-evaluations replay only the suffix after the shifted gate.
class CircuitEval {
 public:
  CircuitEval(int n_qubits, int q_depth)
      : n_(n_qubits),
        depth_(q_depth),
        dim_(std::size_t{1} << n_qubits),
        full_ent_(full_entangle_gates(n_qubits)),
        shift_ent_(shifted_entangle_gates(n_qubits)),
        scratch_(dim_),
        embed_state_(dim_),
        mid_(q_depth, Amps(dim_)) {}

  /// Full evaluation; fills the prefix caches and the output expectations.
  void forward(std::span<const double> weights, std::span<const double> angles,
               std::span<double> out) {
    uniform_state(embed_state_);
    for (int q = 0; q < n_; ++q) {
      qsim::kernels::apply(embed_state_.data(), n_, qsim::GateOp::rz(q, angles[q]));
    }
    scratch_ = embed_state_;
    for (int k = 1; k <= depth_; ++k) {
      apply_entangler(scratch_, k);
      mid_[k - 1] = scratch_;  // after entangler k, before rotations k
      apply_rotations(scratch_, k, weights);
    }
    final_ = scratch_;
    expects(final_, out);
  }

  /// Expectations with the embedding angle `shift_qubit` offset by `delta`.
  /// RZ embeddings are diagonal, so the offset composes onto the cached
  /// post-embedding state.
  void eval_shift_embed(std::span<const double> weights, int shift_qubit,
                        double delta, std::span<double> out) {
    scratch_ = embed_state_;
    qsim::kernels::apply(scratch_.data(), n_, qsim::GateOp::rz(shift_qubit, delta));
    for (int k = 1; k <= depth_; ++k) {
      apply_entangler(scratch_, k);
      apply_rotations(scratch_, k, weights);
    }
    expects(scratch_, out);
  }

  /// Expectations with one rotation occurrence of weight (layer k, qubit i)
  /// shifted by `delta`. `occurrence` is 0 for the RX of a shared pair (odd
  /// layers), 1 for the RY; even layers only have occurrence 1.
  void eval_shift_weight(std::span<const double> weights, int k, int qubit,
                         int occurrence, double delta, std::span<double> out) {
    scratch_ = mid_[k - 1];
    apply_rotations_shifted(scratch_, k, weights, qubit, occurrence, delta);
    for (int k2 = k + 1; k2 <= depth_; ++k2) {
      apply_entangler(scratch_, k2);
      apply_rotations(scratch_, k2, weights);
    }
    expects(scratch_, out);
  }

 private:
  void uniform_state(Amps& s) const {
    const double a = 1.0 / std::sqrt(static_cast<double>(dim_));
    for (auto& v : s) v = {a, 0.0};
  }

  void expects(const Amps& s, std::span<double> out) const {
    for (int q = 0; q < n_; ++q)
      out[q] = qsim::kernels::expect_z(s.data(), n_, q);
  }

  void apply_entangler(Amps& s, int k) const {
    const auto& gates = (k % 2 == 1) ? full_ent_ : shift_ent_;
    for (const auto& g : gates) qsim::kernels::apply(s.data(), n_, g);
  }

  void apply_rotations(Amps& s, int k, std::span<const double> weights) const {
    const double* w = weights.data() + static_cast<std::size_t>(k - 1) * n_;
    if (k % 2 == 1) {
      for (int q = 0; q < n_; ++q) {
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::rx(q, w[q]));
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::ry(q, w[q]));
      }
    } else {
      for (int q = 0; q < n_; ++q) {
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::ry(q, w[q]));
      }
    }
  }

  void apply_rotations_shifted(Amps& s, int k, std::span<const double> weights,
                               int shift_qubit, int occurrence,
                               double delta) const {
    const double* w = weights.data() + static_cast<std::size_t>(k - 1) * n_;
    if (k % 2 == 1) {
      for (int q = 0; q < n_; ++q) {
        const double ax = w[q] + (q == shift_qubit && occurrence == 0 ? delta : 0.0);
        const double ay = w[q] + (q == shift_qubit && occurrence == 1 ? delta : 0.0);
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::rx(q, ax));
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::ry(q, ay));
      }
    } else {
      for (int q = 0; q < n_; ++q) {
        const double ay = w[q] + (q == shift_qubit && occurrence == 1 ? delta : 0.0);
        qsim::kernels::apply(s.data(), n_, qsim::GateOp::ry(q, ay));
      }
    }
  }

  int n_;
  int depth_;
  std::size_t dim_;
  std::vector<qsim::GateOp> full_ent_;
  std::vector<qsim::GateOp> shift_ent_;
  Amps scratch_;
  Amps embed_state_;
  std::vector<Amps> mid_;  // mid_[k-1]: after entangler k, before rotations k
  Amps final_;
};

}  // namespace

DressedCircuit::DressedCircuit(int n_qubits_, int q_depth_, double q_delta_,
                               Rng& rng)
    : n_qubits(n_qubits_), q_depth(q_depth_), q_delta(q_delta_) {
  if (n_qubits < 2 || n_qubits > qsim::kMaxQubits) {
    throw std::invalid_argument("dressed circuit: n_qubits must be in [2, 12]");
  }
  if (q_depth < 1 || q_depth > 8) {
    throw std::invalid_argument("dressed circuit: q_depth must be in [1, 8]");
  }
  std::vector<double> w(static_cast<std::size_t>(q_depth) * n_qubits);
  for (double& v : w) v = q_delta * rng.normal();
  weights = diff::Tensor({static_cast<std::size_t>(q_depth),
                          static_cast<std::size_t>(n_qubits)},
                         std::move(w), /*requires_grad=*/true);
}

std::vector<qsim::GateOp> DressedCircuit::gate_program(
    std::span<const double> angles) const {
  if (static_cast<int>(angles.size()) != n_qubits) {
    throw std::invalid_argument("gate_program: angle count != n_qubits");
  }
  std::vector<qsim::GateOp> prog;
  for (int q = 0; q < n_qubits; ++q) prog.push_back(qsim::GateOp::h(q));
  for (int q = 0; q < n_qubits; ++q)
    prog.push_back(qsim::GateOp::rz(q, angles[q]));
  const auto& w = weights.values();
  for (int k = 1; k <= q_depth; ++k) {
    const auto ent =
        (k % 2 == 1) ? full_entangle_gates(n_qubits) : shifted_entangle_gates(n_qubits);
    prog.insert(prog.end(), ent.begin(), ent.end());
    const double* row = w.data() + static_cast<std::size_t>(k - 1) * n_qubits;
    if (k % 2 == 1) {
      for (int q = 0; q < n_qubits; ++q) {
        prog.push_back(qsim::GateOp::rx(q, row[q]));
        prog.push_back(qsim::GateOp::ry(q, row[q]));
      }
    } else {
      for (int q = 0; q < n_qubits; ++q)
        prog.push_back(qsim::GateOp::ry(q, row[q]));
    }
  }
  return prog;
}

std::vector<qsim::GateOp> full_entangle_gates(int n_qubits) {
  if (n_qubits < 2) {
    throw std::invalid_argument("full entangler requires n_qubits >= 2");
  }
  std::vector<qsim::GateOp> gates;
  for (int i = 0; i < n_qubits; ++i)
    for (int j = i + 1; j < n_qubits; ++j)
      gates.push_back(qsim::GateOp::cnot(i, j));
  return gates;
}

std::vector<qsim::GateOp> shifted_entangle_gates(int n_qubits) {
  if (n_qubits < 2) {
    throw std::invalid_argument("shifted entangler requires n_qubits >= 2");
  }
  std::vector<qsim::GateOp> gates;
  for (int i = 0; i + 1 < n_qubits; ++i)
    gates.push_back(qsim::GateOp::crz(kHalfPi, i, i + 1));
  for (int i = 0; i + 1 < n_qubits; i += 2)
    gates.push_back(qsim::GateOp::swap(i, i + 1));
  return gates;
}

diff::Tensor dressed_preprocess(diff::Tape& tape, const diff::Tensor& features,
                                int n_qubits) {
  if (features.cols() != static_cast<std::size_t>(n_qubits)) {
    throw std::invalid_argument("dressed preprocess: feature width " +
                                features.shape_str() + " != n_qubits " +
                                std::to_string(n_qubits));
  }
  const diff::Tensor t = diff::activate(tape, features, diff::Activation::kTanh);
  return diff::scale(tape, t, kHalfPi);
}

diff::Tensor dressed_quantum(diff::Tape& tape, DressedCircuit& circuit,
                             const diff::Tensor& angles) {
  const std::size_t batch = angles.rows();
  const int nq = circuit.n_qubits;
  if (angles.cols() != static_cast<std::size_t>(nq)) {
    throw std::invalid_argument("dressed quantum: angle width " +
                                angles.shape_str() + " != n_qubits " +
                                std::to_string(nq));
  }
  diff::Tensor out = diff::Tensor::zeros({batch, static_cast<std::size_t>(nq)});
  const bool needs_grad = angles.tracked() || circuit.weights.tracked();

  const auto& w = circuit.weights.values();
  // forward (serial over samples; callers parallelize at the graph level)
  if (!needs_grad) {
    CircuitEval ev(nq, circuit.q_depth);
    for (std::size_t b = 0; b < batch; ++b) {
      ev.forward(w, std::span<const double>(angles.values()).subspan(b * nq, nq),
                 std::span<double>(out.values()).subspan(b * nq, nq));
    }
    return out;
  }
  std::vector<std::shared_ptr<CircuitEval>> caches;
  caches.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    caches.push_back(std::make_shared<CircuitEval>(nq, circuit.q_depth));
    caches.back()->forward(
        w, std::span<const double>(angles.values()).subspan(b * nq, nq),
        std::span<double>(out.values()).subspan(b * nq, nq));
  }

  diff::Tensor weights = circuit.weights;
  const int depth = circuit.q_depth;
  return tape.track(out, {&angles, &weights}, [angles, weights, out, caches, nq,
                                               depth] {
    const auto& upstream = out.grad();
    const auto& w = weights.values();
    const std::size_t batch = angles.rows();
    std::vector<double> fplus(nq), fminus(nq);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* up = upstream.data() + b * nq;
      bool all_zero = true;
      for (int q = 0; q < nq; ++q) {
        if (up[q] != 0.0) {
          all_zero = false;
          break;
        }
      }
      if (all_zero) continue;
      CircuitEval& ev = *caches[b];
      // input embedding angles
      if (angles.tracked()) {
        auto& da = const_cast<diff::Tensor&>(angles).grad();
        for (int i = 0; i < nq; ++i) {
          ev.eval_shift_embed(w, i, kHalfPi, fplus);
          ev.eval_shift_embed(w, i, -kHalfPi, fminus);
          double acc = 0.0;
          for (int q = 0; q < nq; ++q)
            acc += up[q] * 0.5 * (fplus[q] - fminus[q]);
          da[b * nq + i] += acc;
        }
      }
      // circuit weights; odd layers have two rotation occurrences per weight
      if (weights.tracked()) {
        auto& dw = const_cast<diff::Tensor&>(weights).grad();
        for (int k = 1; k <= depth; ++k) {
          const int occ_begin = (k % 2 == 1) ? 0 : 1;
          for (int i = 0; i < nq; ++i) {
            double acc = 0.0;
            for (int occ = occ_begin; occ <= 1; ++occ) {
              ev.eval_shift_weight(w, k, i, occ, kHalfPi, fplus);
              ev.eval_shift_weight(w, k, i, occ, -kHalfPi, fminus);
              for (int q = 0; q < nq; ++q)
                acc += up[q] * 0.5 * (fplus[q] - fminus[q]);
            }
            dw[static_cast<std::size_t>(k - 1) * nq + i] += acc;
          }
        }
      }
    }
  });
}

diff::Tensor dressed_apply(diff::Tape& tape, DressedCircuit& circuit,
                           const diff::Tensor& features) {
  const diff::Tensor angles =
      dressed_preprocess(tape, features, circuit.n_qubits);
  return dressed_quantum(tape, circuit, angles);
}

std::vector<double> dressed_forward_sample(const DressedCircuit& circuit,
                                           std::span<const double> angles) {
  if (static_cast<int>(angles.size()) != circuit.n_qubits) {
    throw std::invalid_argument("dressed forward: angle count != n_qubits");
  }
  CircuitEval ev(circuit.n_qubits, circuit.q_depth);
  std::vector<double> out(circuit.n_qubits);
  ev.forward(circuit.weights.values(), angles, out);
  return out;
}

}  // namespace leq
