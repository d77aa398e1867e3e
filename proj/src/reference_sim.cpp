#include "leq/reference_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace leq::reference {

namespace {

using C = std::complex<double>;

std::vector<std::vector<C>> local_matrix(const qsim::GateOp& g) {
  const C i{0.0, 1.0};
  switch (g.kind) {
    case qsim::GateKind::kH: {
      const double s = 1.0 / std::sqrt(2.0);
      return {{s, s}, {s, -s}};
    }
    case qsim::GateKind::kRX: {
      const double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
      return {{c, -i * sn}, {-i * sn, c}};
    }
    case qsim::GateKind::kRY: {
      const double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
      return {{c, -sn}, {sn, c}};
    }
    case qsim::GateKind::kRZ: {
      return {{std::exp(-i * (g.angle / 2)), 0.0},
              {0.0, std::exp(i * (g.angle / 2))}};
    }
    case qsim::GateKind::kCNOT: {
      return {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    }
    case qsim::GateKind::kCRZ: {
      return {{1, 0, 0, 0},
              {0, 1, 0, 0},
              {0, 0, std::exp(-i * (g.angle / 2)), 0},
              {0, 0, 0, std::exp(i * (g.angle / 2))}};
    }
    case qsim::GateKind::kSWAP: {
      return {{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}};
    }
  }
  throw std::logic_error("unreachable gate kind");
}

}  // namespace

CMatrix gate_matrix(int n_qubits, const qsim::GateOp& g) {
  qsim::kernels::validate(n_qubits, g);
  const std::size_t dim = std::size_t{1} << n_qubits;
  const auto local = local_matrix(g);
  CMatrix full(dim, std::vector<C>(dim, C{0.0, 0.0}));

  // basis-state bit extraction; qubit 0 is the most significant bit
  auto bit_of = [n_qubits](std::size_t idx, int qubit) -> std::size_t {
    return (idx >> (n_qubits - 1 - qubit)) & 1u;
  };

  if (g.arity() == 1) {
    const int q = g.qubits[0];
    for (std::size_t row = 0; row < dim; ++row) {
      for (std::size_t col = 0; col < dim; ++col) {
        if ((row | (std::size_t{1} << (n_qubits - 1 - q))) !=
            (col | (std::size_t{1} << (n_qubits - 1 - q)))) {
          continue;  // all other bits must match
        }
        full[row][col] = local[bit_of(row, q)][bit_of(col, q)];
      }
    }
  } else {
    const int qa = g.qubits[0];
    const int qb = g.qubits[1];
    const std::size_t ma = std::size_t{1} << (n_qubits - 1 - qa);
    const std::size_t mb = std::size_t{1} << (n_qubits - 1 - qb);
    for (std::size_t row = 0; row < dim; ++row) {
      for (std::size_t col = 0; col < dim; ++col) {
        if ((row | ma | mb) != (col | ma | mb)) continue;
        const std::size_t lr = 2 * bit_of(row, qa) + bit_of(row, qb);
        const std::size_t lc = 2 * bit_of(col, qa) + bit_of(col, qb);
        full[row][col] = local[lr][lc];
      }
    }
  }
  return full;
}

std::vector<std::complex<double>> run_program_dense(
    int n_qubits, std::span<const qsim::GateOp> program) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<C> state(dim, C{0.0, 0.0});
  state[0] = {1.0, 0.0};
  for (const auto& g : program) {
    const CMatrix m = gate_matrix(n_qubits, g);
    std::vector<C> next(dim, C{0.0, 0.0});
    for (std::size_t r = 0; r < dim; ++r) {
      C acc{0.0, 0.0};
      for (std::size_t c = 0; c < dim; ++c) acc += m[r][c] * state[c];
      next[r] = acc;
    }
    state = std::move(next);
  }
  return state;
}

double max_amp_deviation_up_to_phase(std::span<const std::complex<double>> a,
                                     std::span<const std::complex<double>> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("amplitude vectors differ in length");
  }
  // align phases on the largest-magnitude component of b
  std::size_t ref = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (std::norm(b[i]) > best) {
      best = std::norm(b[i]);
      ref = i;
    }
  }
  C phase{1.0, 0.0};
  if (std::abs(b[ref]) > 0.0 && std::abs(a[ref]) > 0.0) {
    phase = (a[ref] / std::abs(a[ref])) / (b[ref] / std::abs(b[ref]));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - phase * b[i]));
  }
  return worst;
}

}  // namespace leq::reference
