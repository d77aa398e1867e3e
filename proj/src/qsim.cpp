#include "leq/qsim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace leq::qsim {

const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::kH: return "h";
    case GateKind::kRX: return "rx";
    case GateKind::kRY: return "ry";
    case GateKind::kRZ: return "rz";
    case GateKind::kCNOT: return "cnot";
    case GateKind::kCRZ: return "crz";
    case GateKind::kSWAP: return "swap";
  }
  return "?";
}

GateKind gate_kind_from_name(const std::string& name) {
  if (name == "h") return GateKind::kH;
  if (name == "rx") return GateKind::kRX;
  if (name == "ry") return GateKind::kRY;
  if (name == "rz") return GateKind::kRZ;
  if (name == "cnot") return GateKind::kCNOT;
  if (name == "crz") return GateKind::kCRZ;
  if (name == "swap") return GateKind::kSWAP;
  throw std::invalid_argument("unknown gate kind: " + name);
}

namespace kernels {

namespace {

// Explicit re/im arithmetic keeps the kernels free of library complex-multiply
// calls on every amplitude pair.
inline void apply_1q_dense(std::complex<double>* amps, int n, int q,
                           double m00r, double m00i, double m01r, double m01i,
                           double m10r, double m10i, double m11r, double m11i) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t mask = std::size_t{1} << (n - 1 - q);
  double* a = reinterpret_cast<double*>(amps);
  for (std::size_t g = 0; g < dim; g += 2 * mask) {
    for (std::size_t i = g; i < g + mask; ++i) {
      const std::size_t i0 = 2 * i;
      const std::size_t i1 = 2 * (i + mask);
      const double x0r = a[i0], x0i = a[i0 + 1];
      const double x1r = a[i1], x1i = a[i1 + 1];
      a[i0] = m00r * x0r - m00i * x0i + m01r * x1r - m01i * x1i;
      a[i0 + 1] = m00r * x0i + m00i * x0r + m01r * x1i + m01i * x1r;
      a[i1] = m10r * x0r - m10i * x0i + m11r * x1r - m11i * x1i;
      a[i1 + 1] = m10r * x0i + m10i * x0r + m11r * x1i + m11i * x1r;
    }
  }
}

inline void apply_1q_diag(std::complex<double>* amps, int n, int q, double f0r,
                          double f0i, double f1r, double f1i) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t mask = std::size_t{1} << (n - 1 - q);
  double* a = reinterpret_cast<double*>(amps);
  for (std::size_t i = 0; i < dim; ++i) {
    const double fr = (i & mask) ? f1r : f0r;
    const double fi = (i & mask) ? f1i : f0i;
    const double xr = a[2 * i], xi = a[2 * i + 1];
    a[2 * i] = fr * xr - fi * xi;
    a[2 * i + 1] = fr * xi + fi * xr;
  }
}

}  // namespace

void validate(int n_qubits, const GateOp& g) {
  const int q0 = g.qubits[0];
  const int q1 = g.qubits[1];
  if (q0 < 0 || q0 >= n_qubits) {
    throw std::out_of_range(std::string("gate ") + gate_kind_name(g.kind) +
                            ": qubit index out of range");
  }
  if (g.arity() == 2) {
    if (q1 < 0 || q1 >= n_qubits) {
      throw std::out_of_range(std::string("gate ") + gate_kind_name(g.kind) +
                              ": qubit index out of range");
    }
    if (q0 == q1) {
      throw std::invalid_argument(std::string("gate ") + gate_kind_name(g.kind) +
                                  ": qubit indices must be distinct");
    }
  }
}

void apply(std::complex<double>* amps, int n, const GateOp& g) {
  const std::size_t dim = std::size_t{1} << n;
  switch (g.kind) {
    case GateKind::kH: {
      const double s = 0.70710678118654752440084436210485;  // 1/sqrt(2)
      apply_1q_dense(amps, n, g.qubits[0], s, 0, s, 0, s, 0, -s, 0);
      break;
    }
    case GateKind::kRX: {
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      // [[cos, -i sin], [-i sin, cos]]
      apply_1q_dense(amps, n, g.qubits[0], c, 0, 0, -s, 0, -s, c, 0);
      break;
    }
    case GateKind::kRY: {
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      // [[cos, -sin], [sin, cos]]
      apply_1q_dense(amps, n, g.qubits[0], c, 0, -s, 0, s, 0, c, 0);
      break;
    }
    case GateKind::kRZ: {
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      // diag(e^{-i a/2}, e^{+i a/2})
      apply_1q_diag(amps, n, g.qubits[0], c, -s, c, s);
      break;
    }
    case GateKind::kCNOT: {
      const std::size_t cm = std::size_t{1} << (n - 1 - g.qubits[0]);
      const std::size_t tm = std::size_t{1} << (n - 1 - g.qubits[1]);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cm) && !(i & tm)) std::swap(amps[i], amps[i | tm]);
      }
      break;
    }
    case GateKind::kCRZ: {
      // phases on the control=1 branch: e^{-i a/2} (target 0), e^{+i a/2} (target 1)
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      const std::size_t cm = std::size_t{1} << (n - 1 - g.qubits[0]);
      const std::size_t tm = std::size_t{1} << (n - 1 - g.qubits[1]);
      double* a = reinterpret_cast<double*>(amps);
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & cm)) continue;
        const double fi = (i & tm) ? s : -s;
        const double xr = a[2 * i], xi = a[2 * i + 1];
        a[2 * i] = c * xr - fi * xi;
        a[2 * i + 1] = c * xi + fi * xr;
      }
      break;
    }
    case GateKind::kSWAP: {
      const std::size_t am = std::size_t{1} << (n - 1 - g.qubits[0]);
      const std::size_t bm = std::size_t{1} << (n - 1 - g.qubits[1]);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & am) && !(i & bm)) std::swap(amps[i], amps[i ^ am ^ bm]);
      }
      break;
    }
  }
}

double expect_z(const std::complex<double>* amps, int n, int qubit) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double p = std::norm(amps[i]);
    acc += (i & mask) ? -p : p;
  }
  return acc;
}

}  // namespace kernels

StateVector::StateVector(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::out_of_range("state vector: n_qubits must be in [1, 12]");
  }
  amps_.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
  amps_[0] = {1.0, 0.0};
}

void StateVector::apply(const GateOp& g) {
  kernels::validate(n_, g);
  kernels::apply(amps_.data(), n_, g);
}

double StateVector::expect_z(int qubit) const {
  if (qubit < 0 || qubit >= n_) {
    throw std::out_of_range("expect_z: qubit index out of range");
  }
  return kernels::expect_z(amps_.data(), n_, qubit);
}

double StateVector::norm2() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

StateVector init_zero(int n_qubits) { return StateVector(n_qubits); }

StateVector run_program(int n_qubits, std::span<const GateOp> program) {
  StateVector s(n_qubits);
  for (std::size_t i = 0; i < program.size(); ++i) {
    try {
      s.apply(program[i]);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "program position " << i << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return s;
}

namespace {

double shift_coeff_plus() { return (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0)); }
double shift_coeff_minus() { return (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0)); }

std::vector<double> eval_program(int n_qubits, const std::vector<GateOp>& prog,
                                 std::span<const int> observables) {
  StateVector s = run_program(n_qubits, prog);
  std::vector<double> out(observables.size());
  for (std::size_t o = 0; o < observables.size(); ++o)
    out[o] = s.expect_z(observables[o]);
  return out;
}

}  // namespace

std::vector<std::vector<double>> param_shift_grad(
    int n_qubits, const ProgramBuilder& builder, std::span<const double> angles,
    std::span<const int> observables) {
  const std::vector<GateOp> base =
      builder(std::span<const double>(angles.data(), angles.size()));
  std::vector<std::vector<double>> grads(
      angles.size(), std::vector<double>(observables.size(), 0.0));

  std::vector<double> probe_angles(angles.begin(), angles.end());
  constexpr double kProbe = 0.78539816339744830962;  // pi/4

  for (std::size_t k = 0; k < angles.size(); ++k) {
    // locate the gate occurrences fed by logical angle k
    probe_angles[k] = angles[k] + kProbe;
    const std::vector<GateOp> probed = builder(probe_angles);
    probe_angles[k] = angles[k];
    if (probed.size() != base.size()) {
      throw std::invalid_argument(
          "param_shift_grad: angle changes program structure");
    }
    std::vector<std::size_t> occurrences;
    for (std::size_t g = 0; g < base.size(); ++g) {
      const bool same_struct = probed[g].kind == base[g].kind &&
                               probed[g].qubits == base[g].qubits;
      if (!same_struct) {
        throw std::invalid_argument(
            "param_shift_grad: angle changes program structure");
      }
      if (probed[g].angle != base[g].angle) {
        if (!base[g].has_angle()) {
          throw std::invalid_argument(
              "param_shift_grad: angle feeds a non-rotation gate");
        }
        if (std::fabs((probed[g].angle - base[g].angle) - kProbe) > 1e-9) {
          throw std::invalid_argument(
              "param_shift_grad: angle enters a gate through a nonlinear map");
        }
        occurrences.push_back(g);
      }
    }
    // shift each occurrence independently and sum the contributions
    for (const std::size_t g : occurrences) {
      std::vector<GateOp> prog = base;
      const bool controlled = base[g].kind == GateKind::kCRZ;
      const double half_pi = 1.5707963267948966192313216916398;
      prog[g].angle = base[g].angle + half_pi;
      const std::vector<double> fp = eval_program(n_qubits, prog, observables);
      prog[g].angle = base[g].angle - half_pi;
      const std::vector<double> fm = eval_program(n_qubits, prog, observables);
      if (!controlled) {
        for (std::size_t o = 0; o < observables.size(); ++o)
          grads[k][o] += 0.5 * (fp[o] - fm[o]);
      } else {
        // controlled rotations have generator frequencies {1/2, 1}; the exact
        // rule uses two shift pairs
        prog[g].angle = base[g].angle + 3.0 * half_pi;
        const std::vector<double> fp3 = eval_program(n_qubits, prog, observables);
        prog[g].angle = base[g].angle - 3.0 * half_pi;
        const std::vector<double> fm3 = eval_program(n_qubits, prog, observables);
        const double c1 = shift_coeff_plus();
        const double c2 = shift_coeff_minus();
        for (std::size_t o = 0; o < observables.size(); ++o)
          grads[k][o] += c1 * (fp[o] - fm[o]) - c2 * (fp3[o] - fm3[o]);
      }
    }
  }
  return grads;
}

}  // namespace leq::qsim
