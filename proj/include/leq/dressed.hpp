#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "leq/qsim.hpp"
#include "leq/rng.hpp"
#include "leq/tensor.hpp"

namespace leq {

/// Trainable quantum layer: tanh-scaled angle embedding, Hadamard
/// initialization, q_depth blocks of entangling + rotation layers with
/// parity-alternating structure, and per-qubit Z-expectation readout.
///
/// Odd blocks (1-indexed) use the all-pairs CNOT entangler followed by
/// shared-angle RX then RY rotations; even blocks use the CRZ/SWAP shifted
/// entangler followed by RY rotations.
struct DressedCircuit {
  int n_qubits = 4;
  int q_depth = 2;
  double q_delta = 0.01;
  diff::Tensor weights;  // [q_depth x n_qubits], trainable

  DressedCircuit(int n_qubits, int q_depth, double q_delta, Rng& rng);

  /// Full Algorithm gate sequence (H layer, RZ embedding, blocks) for one
  /// sample, using the current weights. For inspection and slow-path checks.
  std::vector<qsim::GateOp> gate_program(std::span<const double> angles) const;
};

/// CNOT(i, j) for every ordered pair i < j in lexicographic order.
std::vector<qsim::GateOp> full_entangle_gates(int n_qubits);

/// CRZ(pi/2, i, i+1) for i = 0..n-2, then SWAP(i, i+1) for even i in 0..n-2.
std::vector<qsim::GateOp> shifted_entangle_gates(int n_qubits);

/// tanh(x) * pi/2 elementwise; rejects feature width != n_qubits.
diff::Tensor dressed_preprocess(diff::Tape& tape, const diff::Tensor& features,
                                int n_qubits);

/// Quantum block as a tape operation: rows of `angles` (each in [-pi/2, pi/2])
/// map to rows of Z expectations. Gradients for both the circuit weights and
/// the input angles are computed with the parameter-shift rule; shared-angle
/// rotations contribute one shifted evaluation pair per occurrence.
diff::Tensor dressed_quantum(diff::Tape& tape, DressedCircuit& circuit,
                             const diff::Tensor& angles);

/// preprocess + quantum block.
diff::Tensor dressed_apply(diff::Tape& tape, DressedCircuit& circuit,
                           const diff::Tensor& features);

/// Tape-free single-sample evaluation (property tests, CLI).
std::vector<double> dressed_forward_sample(const DressedCircuit& circuit,
                                           std::span<const double> angles);

}  // namespace leq
