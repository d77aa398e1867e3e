#pragma once

#include <complex>
#include <span>
#include <vector>

#include "leq/qsim.hpp"

namespace leq::reference {

using CMatrix = std::vector<std::vector<std::complex<double>>>;

/// Dense 2^n x 2^n unitary of a single gate, built from the textbook 2x2/4x4
/// definitions by explicit basis-index embedding. Deliberately shares no code
/// with the amplitude-pair kernels; verification compares the two paths.
CMatrix gate_matrix(int n_qubits, const qsim::GateOp& g);

/// Full-matrix product simulation of a program from |0...0>.
std::vector<std::complex<double>> run_program_dense(
    int n_qubits, std::span<const qsim::GateOp> program);

/// Max |a_i - e^{i phi} b_i| over the best common phase e^{i phi}.
double max_amp_deviation_up_to_phase(
    std::span<const std::complex<double>> a,
    std::span<const std::complex<double>> b);

}  // namespace leq::reference
