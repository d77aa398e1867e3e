#include "leq/lgeqb.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "leq/minkowski.hpp"

namespace leq {

namespace {

constexpr double kCoordClampLimit = 1e3;

diff::Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> w(fan_in * fan_out);
  for (double& v : w) v = rng.uniform(-limit, limit);
  return diff::Tensor({fan_in, fan_out}, std::move(w), /*requires_grad=*/true);
}

void warn_coordinate_clamp() {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true)) {
    std::cerr << "warning: coordinate update exceeded |delta| = "
              << kCoordClampLimit << "; clamped\n";
  }
}

}  // namespace

EdgeIndex make_full_edges(int n_nodes, bool include_self) {
  EdgeIndex e;
  e.src.reserve(static_cast<std::size_t>(n_nodes) * (n_nodes - 1));
  e.dst.reserve(e.src.capacity());
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = 0; j < n_nodes; ++j) {
      if (i == j && !include_self) continue;
      e.src.push_back(i);
      e.dst.push_back(j);
    }
  }
  return e;
}

LgeqbParams::LgeqbParams(int n_hidden_, int n_qubits_, int q_depth,
                         double q_delta, double coord_scale_, Rng& rng)
    : n_hidden(n_hidden_),
      n_qubits(n_qubits_),
      coord_scale(coord_scale_),
      phi_e(n_qubits_, q_depth, q_delta, rng),
      phi_h(n_qubits_, q_depth, q_delta, rng),
      phi_m(n_qubits_, q_depth, q_delta, rng),
      phi_x(n_qubits_, q_depth, q_delta, rng) {
  if (n_hidden != n_qubits) {
    throw std::invalid_argument(
        "lgeqb: n_hidden must equal n_qubits (residual scalar update)");
  }
  if (!(coord_scale > 0.0)) {
    throw std::invalid_argument("lgeqb: coordinate scale must be positive");
  }
  const std::size_t h = static_cast<std::size_t>(n_hidden);
  const std::size_t q = static_cast<std::size_t>(n_qubits);
  reducer_e_w = xavier_uniform(2 * h + 2, q, rng);
  reducer_e_b = diff::Tensor({q}, std::vector<double>(q, 0.0), true);
  reducer_h_w = xavier_uniform(2 * h, q, rng);
  reducer_h_b = diff::Tensor({q}, std::vector<double>(q, 0.0), true);
  phi_m_head_w = xavier_uniform(q, 1, rng);
  phi_m_head_b = diff::Tensor({1}, {0.0}, true);
  phi_x_head_w = xavier_uniform(q, 1, rng);
}

diff::Tensor edge_features(diff::Tape& tape, const diff::Tensor& x,
                           const diff::Tensor& h, const EdgeIndex& edges) {
  const diff::Tensor hi = diff::gather_rows(tape, h, edges.src);
  const diff::Tensor hj = diff::gather_rows(tape, h, edges.dst);
  const diff::Tensor xi = diff::gather_rows(tape, x, edges.src);
  const diff::Tensor xj = diff::gather_rows(tape, x, edges.dst);
  const diff::Tensor d = diff::sub(tape, xi, xj);
  const diff::Tensor norm2 = diff::minkowski_dot_rows(tape, d, d);
  const diff::Tensor inner = diff::minkowski_dot_rows(tape, xi, xj);
  const diff::Tensor n2c = diff::signed_log1p_op(tape, norm2);
  const diff::Tensor inc = diff::signed_log1p_op(tape, inner);
  return diff::concat_cols(tape, {hi, hj, n2c, inc});
}

std::vector<double> edge_features_single(const diff::Tensor& x,
                                         const diff::Tensor& h, int i, int j) {
  if (i == j) {
    throw std::invalid_argument("edge_features: self-edges are excluded");
  }
  diff::Tape tape;
  EdgeIndex e;
  e.src = {i};
  e.dst = {j};
  const diff::Tensor f = edge_features(tape, x, h, e);
  return f.values();
}

diff::Tensor compute_messages(diff::Tape& tape, LgeqbParams& p,
                              const diff::Tensor& feats) {
  const std::size_t want = 2 * static_cast<std::size_t>(p.n_hidden) + 2;
  if (feats.cols() != want) {
    std::ostringstream os;
    os << "compute_messages: feature width " << feats.shape_str()
       << " != " << want;
    throw std::invalid_argument(os.str());
  }
  const diff::Tensor reduced =
      diff::affine(tape, feats, p.reducer_e_w, p.reducer_e_b);
  return dressed_apply(tape, p.phi_e, reduced);
}

diff::Tensor update_coordinates(diff::Tape& tape, LgeqbParams& p,
                                const diff::Tensor& x,
                                const diff::Tensor& messages,
                                const EdgeIndex& edges) {
  const diff::Tensor circ = dressed_apply(tape, p.phi_x, messages);
  const diff::Tensor coef =
      diff::affine(tape, circ, p.phi_x_head_w, diff::Tensor{});
  const diff::Tensor xj = diff::gather_rows(tape, x, edges.dst);
  const diff::Tensor weighted = diff::row_broadcast_mul(tape, xj, coef);
  const diff::Tensor contrib =
      diff::scatter_add_rows(tape, weighted, edges.src, x.rows());
  diff::Tensor delta = diff::scale(tape, contrib, p.coord_scale);
  for (const double v : delta.values()) {
    if (std::fabs(v) > kCoordClampLimit) {
      warn_coordinate_clamp();
      delta = diff::clamp(tape, delta, -kCoordClampLimit, kCoordClampLimit);
      break;
    }
  }
  return diff::add(tape, x, delta);
}

diff::Tensor edge_weights(diff::Tape& tape, LgeqbParams& p,
                          const diff::Tensor& messages) {
  const diff::Tensor circ = dressed_apply(tape, p.phi_m, messages);
  const diff::Tensor logits =
      diff::affine(tape, circ, p.phi_m_head_w, p.phi_m_head_b);
  return diff::activate(tape, logits, diff::Activation::kSigmoid);
}

diff::Tensor update_scalars(diff::Tape& tape, LgeqbParams& p,
                            const diff::Tensor& h, const diff::Tensor& messages,
                            const diff::Tensor& weights, const EdgeIndex& edges) {
  const diff::Tensor weighted = diff::row_broadcast_mul(tape, messages, weights);
  const diff::Tensor agg =
      diff::scatter_add_rows(tape, weighted, edges.src, h.rows());
  const diff::Tensor joint = diff::concat_cols(tape, {h, agg});
  const diff::Tensor reduced =
      diff::affine(tape, joint, p.reducer_h_w, p.reducer_h_b);
  const diff::Tensor resid = dressed_apply(tape, p.phi_h, reduced);
  return diff::add(tape, h, resid);
}

diff::Tensor irc_prefactors(diff::Tape& tape, const diff::Tensor& x,
                            const EdgeIndex& edges) {
  const diff::Tensor xi = diff::gather_rows(tape, x, edges.src);
  const diff::Tensor xj = diff::gather_rows(tape, x, edges.dst);
  const diff::Tensor inner = diff::minkowski_dot_rows(tape, xi, xj);
  // denominator sums over the neighborhood of the emitting node j, i.e. every
  // k != j including i itself:  sum_{k != j} <x_i, x_k>. Rescaling x_j then
  // leaves the denominator unchanged, so a soft emission scales its message
  // exactly linearly.
  const diff::Tensor self = diff::minkowski_dot_rows(tape, x, x);  // m^2 per node
  const diff::Tensor sum_others =
      diff::scatter_add_rows(tape, inner, edges.src, x.rows());
  const diff::Tensor total = diff::add(tape, self, sum_others);
  const diff::Tensor total_edge = diff::gather_rows(tape, total, edges.src);
  const diff::Tensor den = diff::sub(tape, total_edge, inner);
  for (std::size_t e = 0; e < den.size(); ++e) {
    if (std::fabs(den.values()[e]) < 1e-12) {
      std::ostringstream os;
      os << "degenerate kinematics: attention denominator vanishes at node "
         << edges.src[e];
      throw std::runtime_error(os.str());
    }
  }
  return diff::div_cols(tape, inner, den);
}

BlockState block_forward(diff::Tape& tape, LgeqbParams& p, const BlockState& in,
                         const EdgeIndex& edges, bool irc_safe) {
  const diff::Tensor feats = edge_features(tape, in.x, in.h, edges);
  diff::Tensor messages = compute_messages(tape, p, feats);
  if (irc_safe) {
    const diff::Tensor pref = irc_prefactors(tape, in.x, edges);
    messages = diff::row_broadcast_mul(tape, messages, pref);
  }
  const diff::Tensor x_next = update_coordinates(tape, p, in.x, messages, edges);
  const diff::Tensor w = edge_weights(tape, p, messages);
  const diff::Tensor h_next = update_scalars(tape, p, in.h, messages, w, edges);
  return {x_next, h_next};
}

double collinear_additivity_residual(LgeqbParams& p, const BlockState& state,
                                     int i, int j, double z, double angle,
                                     bool irc_safe) {
  const std::size_t n = state.n_nodes();
  if (i == j || i < 0 || j < 0 || static_cast<std::size_t>(i) >= n ||
      static_cast<std::size_t>(j) >= n) {
    throw std::invalid_argument("collinear residual: invalid node pair");
  }
  auto message_row = [&](const diff::Tensor& x, const diff::Tensor& h,
                         int from, int to) {
    diff::Tape tape;
    EdgeIndex edges = make_full_edges(static_cast<int>(x.rows()));
    const diff::Tensor feats = edge_features(tape, x, h, edges);
    diff::Tensor msgs = compute_messages(tape, p, feats);
    if (irc_safe) {
      const diff::Tensor pref = irc_prefactors(tape, x, edges);
      msgs = diff::row_broadcast_mul(tape, msgs, pref);
    }
    std::vector<double> row(msgs.cols());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges.src[e] == from && edges.dst[e] == to) {
        for (std::size_t c = 0; c < msgs.cols(); ++c) row[c] = msgs.at(e, c);
        return row;
      }
    }
    throw std::logic_error("collinear residual: edge not found");
  };

  const std::vector<double> base = message_row(state.x, state.h, i, j);

  // split node j into fractions z and 1-z, separated by `angle` around an
  // axis perpendicular to the spatial momentum
  const double pj[4] = {state.x.at(j, 0), state.x.at(j, 1), state.x.at(j, 2),
                        state.x.at(j, 3)};
  double axis[3] = {-pj[2], pj[1], 0.0};  // perpendicular to (px, py, .) in-plane
  double an = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1]);
  if (an < 1e-12) {
    axis[0] = 1.0;
    axis[1] = 0.0;
    an = 1.0;
  }
  axis[0] /= an;
  axis[1] /= an;
  auto rotate = [&](const double v[3], double theta, double out[3]) {
    // Rodrigues rotation about `axis`
    const double kx = axis[0], ky = axis[1], kz = axis[2];
    const double c = std::cos(theta), s = std::sin(theta);
    const double dot = kx * v[0] + ky * v[1] + kz * v[2];
    out[0] = v[0] * c + (ky * v[2] - kz * v[1]) * s + kx * dot * (1 - c);
    out[1] = v[1] * c + (kz * v[0] - kx * v[2]) * s + ky * dot * (1 - c);
    out[2] = v[2] * c + (kx * v[1] - ky * v[0]) * s + kz * dot * (1 - c);
  };
  const double pvec[3] = {pj[1], pj[2], pj[3]};
  double pa[3], pb[3];
  rotate(pvec, angle / 2, pa);
  rotate(pvec, -angle / 2, pb);

  const std::size_t cols_x = 4;
  std::vector<double> xs = state.x.values();
  // node j -> fraction z, appended node -> fraction 1-z
  xs[j * cols_x + 0] = z * pj[0];
  xs[j * cols_x + 1] = z * pa[0];
  xs[j * cols_x + 2] = z * pa[1];
  xs[j * cols_x + 3] = z * pa[2];
  xs.push_back((1 - z) * pj[0]);
  xs.push_back((1 - z) * pb[0]);
  xs.push_back((1 - z) * pb[1]);
  xs.push_back((1 - z) * pb[2]);
  std::vector<double> hs = state.h.values();
  const std::size_t hc = state.h.cols();
  for (std::size_t c = 0; c < hc; ++c) hs.push_back(state.h.at(j, c));

  const diff::Tensor x_split({n + 1, cols_x}, std::move(xs));
  const diff::Tensor h_split({n + 1, hc}, std::move(hs));
  const std::vector<double> mj = message_row(x_split, h_split, i, j);
  const std::vector<double> mr =
      message_row(x_split, h_split, i, static_cast<int>(n));

  double worst = 0.0;
  for (std::size_t c = 0; c < base.size(); ++c) {
    worst = std::max(worst, std::fabs(base[c] - mj[c] - mr[c]));
  }
  return worst;
}

}  // namespace leq
