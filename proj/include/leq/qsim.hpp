#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace leq::qsim {

inline constexpr int kMaxQubits = 12;

enum class GateKind { kH, kRX, kRY, kRZ, kCNOT, kCRZ, kSWAP };

const char* gate_kind_name(GateKind k);
GateKind gate_kind_from_name(const std::string& name);

/// One gate of a program. Qubit index 0 is the most significant bit of the
/// amplitude index. For two-qubit gates qubits[0] is the control (CNOT, CRZ)
/// or the first swapped line.
struct GateOp {
  GateKind kind;
  std::array<int, 2> qubits{-1, -1};
  double angle = 0.0;

  static GateOp h(int q) { return {GateKind::kH, {q, -1}, 0.0}; }
  static GateOp rx(int q, double a) { return {GateKind::kRX, {q, -1}, a}; }
  static GateOp ry(int q, double a) { return {GateKind::kRY, {q, -1}, a}; }
  static GateOp rz(int q, double a) { return {GateKind::kRZ, {q, -1}, a}; }
  static GateOp cnot(int c, int t) { return {GateKind::kCNOT, {c, t}, 0.0}; }
  static GateOp crz(double a, int c, int t) { return {GateKind::kCRZ, {c, t}, a}; }
  static GateOp swap(int a, int b) { return {GateKind::kSWAP, {a, b}, 0.0}; }

  int arity() const {
    return (kind == GateKind::kCNOT || kind == GateKind::kCRZ ||
            kind == GateKind::kSWAP)
               ? 2
               : 1;
  }
  bool has_angle() const {
    return kind == GateKind::kRX || kind == GateKind::kRY ||
           kind == GateKind::kRZ || kind == GateKind::kCRZ;
  }
};

// Raw kernels on contiguous amplitude arrays; the hot path for the quantum
// layers operates on scratch buffers through these.
namespace kernels {
void validate(int n_qubits, const GateOp& g);
void apply(std::complex<double>* amps, int n_qubits, const GateOp& g);
double expect_z(const std::complex<double>* amps, int n_qubits, int qubit);
}  // namespace kernels

/// Dense statevector of up to kMaxQubits qubits.
class StateVector {
 public:
  /// |0...0>. Throws std::out_of_range unless 1 <= n_qubits <= 12.
  explicit StateVector(int n_qubits);

  int n_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::complex<double> amp(std::size_t i) const { return amps_[i]; }
  std::span<const std::complex<double>> amps() const { return amps_; }
  std::span<std::complex<double>> amps_mut() { return amps_; }

  void apply(const GateOp& g);
  double expect_z(int qubit) const;
  double norm2() const;

 private:
  int n_;
  std::vector<std::complex<double>> amps_;
};

StateVector init_zero(int n_qubits);

/// Applies the gates in order to |0...0>. Gate errors are rethrown with the
/// program position attached.
StateVector run_program(int n_qubits, std::span<const GateOp> program);

using ProgramBuilder =
    std::function<std::vector<GateOp>(std::span<const double> angles)>;

/// Parameter-shift gradient of Z expectations with respect to each logical
/// angle: result[k][o] = d<Z_{observables[o]}>/d(angles[k]).
///
/// Occurrences of each logical angle are located by probing the builder; a
/// logical angle may feed several rotation gates (shared weights) and each
/// occurrence is shifted independently and summed. RX/RY/RZ use the two-term
/// rule; CRZ uses the exact four-term rule for controlled rotations. Throws
/// std::invalid_argument if an angle alters anything but rotation angles.
std::vector<std::vector<double>> param_shift_grad(
    int n_qubits, const ProgramBuilder& builder, std::span<const double> angles,
    std::span<const int> observables);

}  // namespace leq::qsim
