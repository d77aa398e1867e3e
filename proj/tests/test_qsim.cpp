#include <stdexcept>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "leq/qsim.hpp"
#include "leq/reference_sim.hpp"
#include "leq/rng.hpp"

using namespace leq;
using qsim::GateKind;
using qsim::GateOp;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

std::vector<GateOp> random_program(Rng& rng, int n_qubits, int n_gates) {
  std::vector<GateOp> prog;
  for (int g = 0; g < n_gates; ++g) {
    const int kind = static_cast<int>(rng.uniform_int(7));
    const int q0 = static_cast<int>(rng.uniform_int(n_qubits));
    const int q1 = (q0 + 1 + static_cast<int>(rng.uniform_int(n_qubits - 1))) % n_qubits;
    const double a = rng.uniform(-3, 3);
    switch (static_cast<GateKind>(kind)) {
      case GateKind::kH: prog.push_back(GateOp::h(q0)); break;
      case GateKind::kRX: prog.push_back(GateOp::rx(q0, a)); break;
      case GateKind::kRY: prog.push_back(GateOp::ry(q0, a)); break;
      case GateKind::kRZ: prog.push_back(GateOp::rz(q0, a)); break;
      case GateKind::kCNOT: prog.push_back(GateOp::cnot(q0, q1)); break;
      case GateKind::kCRZ: prog.push_back(GateOp::crz(a, q0, q1)); break;
      case GateKind::kSWAP: prog.push_back(GateOp::swap(q0, q1)); break;
    }
  }
  return prog;
}

}  // namespace

TEST_SUITE("qsim") {

TEST_CASE("zero state initialization") {
  const auto s1 = qsim::init_zero(1);
  CHECK(s1.amp(0) == std::complex<double>{1, 0});
  CHECK(s1.amp(1) == std::complex<double>{0, 0});
  const auto s2 = qsim::init_zero(2);
  CHECK(s2.dim() == 4);
  CHECK(s2.amp(0).real() == 1.0);
  CHECK(s2.norm2() == 1.0);
  CHECK_THROWS_AS(qsim::init_zero(0), std::out_of_range);
  CHECK_THROWS_AS(qsim::init_zero(13), std::out_of_range);
}

TEST_CASE("hadamard creates the balanced superposition") {
  auto s = qsim::init_zero(1);
  s.apply(GateOp::h(0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(s.amp(0).real() == doctest::Approx(inv_sqrt2));
  CHECK(s.amp(1).real() == doctest::Approx(inv_sqrt2));
}

TEST_CASE("ry(pi) flips the zero state up to sign") {
  auto s = qsim::init_zero(1);
  s.apply(GateOp::ry(0, 3.14159265358979323846));
  CHECK(std::abs(s.amp(0)) < 1e-12);
  CHECK(std::abs(std::abs(s.amp(1)) - 1.0) < 1e-12);
}

TEST_CASE("cnot basis action with qubit 0 as the most significant bit") {
  auto s = qsim::init_zero(2);
  s.apply(GateOp::rx(0, 3.14159265358979323846));  // |10> up to phase
  s.apply(GateOp::cnot(0, 1));
  CHECK(std::abs(s.amp(0b11)) == doctest::Approx(1.0));
}

TEST_CASE("crz phases the control-1 branch per the dense oracle") {
  // (|10> + |11>)/sqrt(2), then CRZ(pi/2)
  std::vector<GateOp> prog{GateOp::rx(0, 3.14159265358979323846),
                           GateOp::h(1), GateOp::crz(kHalfPi, 0, 1)};
  const auto fast = qsim::run_program(2, prog);
  const auto dense = reference::run_program_dense(2, prog);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(fast.amp(i) - dense[i]) < 1e-12);
  }
  // phases e^{-i pi/4} on |10> and e^{+i pi/4} on |11>
  CHECK(std::arg(fast.amp(0b10) / fast.amp(0b11)) == doctest::Approx(-kHalfPi));
}

TEST_CASE("z expectations") {
  const auto s0 = qsim::init_zero(1);
  CHECK(s0.expect_z(0) == doctest::Approx(1.0));
  auto sh = qsim::init_zero(1);
  sh.apply(GateOp::h(0));
  CHECK(std::fabs(sh.expect_z(0)) < 1e-12);
  for (const double theta : {0.3, 1.2}) {
    auto s = qsim::init_zero(1);
    s.apply(GateOp::ry(0, theta));
    CHECK(s.expect_z(0) == doctest::Approx(std::cos(theta)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(s0.expect_z(3), std::out_of_range);
}

TEST_CASE("run_program ordering and error reporting") {
  const auto empty = qsim::run_program(3, {});
  CHECK(empty.amp(0).real() == 1.0);

  std::vector<GateOp> twice{GateOp::h(0), GateOp::h(0)};
  const auto s = qsim::run_program(1, twice);
  CHECK(std::abs(s.amp(0) - std::complex<double>{1, 0}) < 1e-12);

  std::vector<GateOp> bad{GateOp::h(0), GateOp::cnot(0, 5)};
  CHECK_THROWS_WITH_AS(qsim::run_program(2, bad),
                       doctest::Contains("position 1"), std::runtime_error);
}

TEST_CASE("norm preserved across random programs") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int nq = 2 + static_cast<int>(rng.uniform_int(5));
    const auto prog = random_program(rng, nq, 50);
    const auto s = qsim::run_program(nq, prog);
    CHECK(std::fabs(s.norm2() - 1.0) < 1e-12);
  }
}

TEST_CASE("every gate agrees with its dense matrix") {
  Rng rng(202);
  for (const int nq : {2, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto prog = random_program(rng, nq, 12);
      const auto fast = qsim::run_program(nq, prog);
      const auto dense = reference::run_program_dense(nq, prog);
      for (std::size_t i = 0; i < dense.size(); ++i) {
        CHECK(std::abs(fast.amp(i) - dense[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("involutions and rz additivity") {
  Rng rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const auto prep = random_program(rng, 2, 8);
    auto s = qsim::run_program(2, prep);
    const auto original = std::vector<std::complex<double>>(s.amps().begin(),
                                                            s.amps().end());
    for (const GateOp& g : {GateOp::h(0), GateOp::cnot(0, 1), GateOp::swap(0, 1)}) {
      auto t = s;
      t.apply(g);
      t.apply(g);
      for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(std::abs(t.amp(i) - original[i]) < 1e-12);
      }
    }
    // RZ(a) RZ(b) == RZ(a+b) up to global phase
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    auto lhs = s;
    lhs.apply(GateOp::rz(0, a));
    lhs.apply(GateOp::rz(0, b));
    auto rhs = s;
    rhs.apply(GateOp::rz(0, a + b));
    const auto la = lhs.amps();
    const auto ra = rhs.amps();
    CHECK(reference::max_amp_deviation_up_to_phase(la, ra) < 1e-12);
  }
}

TEST_CASE("shared-angle ry rx composition equals the dense product") {
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const double gamma = rng.uniform(-3, 3);
    // apply RX then RY (right-to-left product RY * RX)
    std::vector<GateOp> seq{GateOp::h(0), GateOp::rx(0, gamma), GateOp::ry(0, gamma)};
    const auto fast = qsim::run_program(1, seq);

    const double c = std::cos(gamma / 2), sn = std::sin(gamma / 2);
    const std::complex<double> i{0, 1};
    // dense product of the two cited 2x2 matrices
    const std::complex<double> m00 = c * c + (-sn) * (-i * sn);
    const std::complex<double> m01 = c * (-i * sn) + (-sn) * c;
    const std::complex<double> m10 = sn * c + c * (-i * sn);
    const std::complex<double> m11 = sn * (-i * sn) + c * c;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const std::complex<double> want0 = (m00 + m01) * inv_sqrt2;
    const std::complex<double> want1 = (m10 + m11) * inv_sqrt2;
    CHECK(std::abs(fast.amp(0) - want0) < 1e-12);
    CHECK(std::abs(fast.amp(1) - want1) < 1e-12);
  }
}

TEST_CASE("parameter shift on a single ry") {
  const qsim::ProgramBuilder builder = [](std::span<const double> a) {
    return std::vector<GateOp>{GateOp::ry(0, a[0])};
  };
  const std::vector<int> obs{0};
  {
    const std::vector<double> angles{0.0};
    const auto g = qsim::param_shift_grad(1, builder, angles, obs);
    CHECK(std::fabs(g[0][0]) < 1e-12);  // -sin(0)
  }
  {
    const std::vector<double> angles{kHalfPi};
    const auto g = qsim::param_shift_grad(1, builder, angles, obs);
    CHECK(g[0][0] == doctest::Approx(-1.0).epsilon(1e-10));
  }
}

TEST_CASE("parameter shift matches finite differences on random programs") {
  Rng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int nq = 4;
    const int n_angles = 4 + static_cast<int>(rng.uniform_int(3));
    struct Slot { int kind, q0, q1; };
    std::vector<Slot> slots;
    for (int k = 0; k < n_angles; ++k) {
      slots.push_back({static_cast<int>(rng.uniform_int(5)),
                       static_cast<int>(rng.uniform_int(nq)), 0});
      slots.back().q1 = (slots.back().q0 + 1 +
                         static_cast<int>(rng.uniform_int(nq - 1))) % nq;
    }
    const qsim::ProgramBuilder builder = [&](std::span<const double> a) {
      std::vector<GateOp> prog;
      for (int q = 0; q < nq; ++q) prog.push_back(GateOp::h(q));
      for (int k = 0; k < n_angles; ++k) {
        const Slot& s = slots[static_cast<std::size_t>(k)];
        switch (s.kind) {
          case 0: prog.push_back(GateOp::rx(s.q0, a[k])); break;
          case 1: prog.push_back(GateOp::ry(s.q0, a[k])); break;
          case 2: prog.push_back(GateOp::rz(s.q0, a[k])); break;
          case 3: prog.push_back(GateOp::crz(a[k], s.q0, s.q1)); break;
          case 4:
            // shared-angle pair
            prog.push_back(GateOp::rx(s.q0, a[k]));
            prog.push_back(GateOp::ry(s.q0, a[k]));
            break;
        }
        prog.push_back(GateOp::cnot(k % (nq - 1), k % (nq - 1) + 1));
      }
      return prog;
    };

    std::vector<double> angles(static_cast<std::size_t>(n_angles));
    for (double& a : angles) a = rng.uniform(-1.5, 1.5);
    const std::vector<int> obs{0, 1, 2, 3};
    const auto grads = qsim::param_shift_grad(nq, builder, angles, obs);

    const double h = 1e-5;
    for (std::size_t k = 0; k < angles.size(); ++k) {
      std::vector<double> shifted(angles);
      shifted[k] += h;
      const auto sp = qsim::run_program(nq, builder(shifted));
      shifted[k] -= 2 * h;
      const auto sm = qsim::run_program(nq, builder(shifted));
      for (std::size_t o = 0; o < obs.size(); ++o) {
        const double fd = (sp.expect_z(obs[o]) - sm.expect_z(obs[o])) / (2 * h);
        CHECK(std::fabs(grads[k][o] - fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("parameter shift rejects angles feeding structural fields") {
  const qsim::ProgramBuilder builder = [](std::span<const double> a) {
    // the angle decides which qubit receives the gate: not a rotation input
    std::vector<GateOp> prog;
    prog.push_back(GateOp::ry(a[0] > 0 ? 1 : 0, 0.5));
    return prog;
  };
  const std::vector<double> angles{-0.1};
  const std::vector<int> obs{0};
  CHECK_THROWS_AS(qsim::param_shift_grad(2, builder, angles, obs),
                  std::invalid_argument);

  const qsim::ProgramBuilder nonlinear = [](std::span<const double> a) {
    return std::vector<GateOp>{GateOp::ry(0, std::sin(a[0]))};
  };
  CHECK_THROWS_AS(qsim::param_shift_grad(1, nonlinear, angles, obs),
                  std::invalid_argument);
}

TEST_CASE("gate validation") {
  auto s = qsim::init_zero(2);
  CHECK_THROWS_AS(s.apply(GateOp::rx(5, 0.1)), std::out_of_range);
  CHECK_THROWS_AS(s.apply(GateOp::cnot(1, 1)), std::invalid_argument);
}

}  // TEST_SUITE
