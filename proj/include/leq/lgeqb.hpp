#pragma once

#include <vector>

#include "leq/dressed.hpp"
#include "leq/ops.hpp"
#include "leq/rng.hpp"
#include "leq/tensor.hpp"

namespace leq {

/// The (x, h) pair flowing through the message-passing layers:
/// x is [N x 4] coordinate embeddings, h is [N x n_hidden] node scalars.
struct BlockState {
  diff::Tensor x;
  diff::Tensor h;
  std::size_t n_nodes() const { return x.rows(); }
};

/// Ordered directed edges (src i != dst j) of a fully connected graph.
struct EdgeIndex {
  std::vector<int> src;
  std::vector<int> dst;
  std::size_t size() const { return src.size(); }
};

EdgeIndex make_full_edges(int n_nodes, bool include_self = false);

/// Parameters of one Lorentz group equivariant quantum block.
struct LgeqbParams {
  int n_hidden = 4;
  int n_qubits = 4;
  double coord_scale = 1e-3;  // c in the coordinate update

  diff::Tensor reducer_e_w, reducer_e_b;  // (2h+2) -> nq
  diff::Tensor reducer_h_w, reducer_h_b;  // (2h)   -> nq
  DressedCircuit phi_e, phi_h, phi_m, phi_x;
  diff::Tensor phi_m_head_w, phi_m_head_b;  // nq -> 1
  diff::Tensor phi_x_head_w;                // nq -> 1, no bias

  LgeqbParams(int n_hidden, int n_qubits, int q_depth, double q_delta,
              double coord_scale, Rng& rng);
};

/// Concatenated edge inputs [h_i, h_j, slog(|x_i-x_j|^2_M), slog(<x_i,x_j>_M)]
/// for every (i, j) in `edges` -> [E x (2h+2)].
diff::Tensor edge_features(diff::Tape& tape, const diff::Tensor& x,
                           const diff::Tensor& h, const EdgeIndex& edges);

/// Single-edge variant; rejects i == j.
std::vector<double> edge_features_single(const diff::Tensor& x,
                                         const diff::Tensor& h, int i, int j);

/// m = phi_e(preprocess(reducer_e(feats))) -> [E x nq], entries in [-1, 1].
diff::Tensor compute_messages(diff::Tape& tape, LgeqbParams& p,
                              const diff::Tensor& feats);

/// x_i' = x_i + c * sum_j phi_x(m_ij) x_j, with the per-element update clamped
/// to +-1e3 (guards float blowup at depth; a warning is logged on trigger).
diff::Tensor update_coordinates(diff::Tape& tape, LgeqbParams& p,
                                const diff::Tensor& x,
                                const diff::Tensor& messages,
                                const EdgeIndex& edges);

/// w_ij = sigmoid(affine(phi_m(m_ij))) in (0, 1) -> [E x 1].
diff::Tensor edge_weights(diff::Tape& tape, LgeqbParams& p,
                          const diff::Tensor& messages);

/// h_i' = h_i + phi_h(preprocess(reducer_h([h_i, sum_j w_ij m_ij]))).
diff::Tensor update_scalars(diff::Tape& tape, LgeqbParams& p,
                            const diff::Tensor& h, const diff::Tensor& messages,
                            const diff::Tensor& weights, const EdgeIndex& edges);

/// Attention prefactors <x_i,x_j> / sum_{k != j} <x_i,x_k> -> [E x 1].
/// The denominator runs over the neighborhood of the emitting node j, so a
/// soft emission x_j -> z x_j scales its prefactor exactly linearly in z.
/// Throws a degenerate-kinematics error naming the node when a denominator
/// falls below 1e-12 in magnitude.
diff::Tensor irc_prefactors(diff::Tape& tape, const diff::Tensor& x,
                            const EdgeIndex& edges);

/// Full block: messages (optionally IRC-scaled), coordinate update, edge
/// weights, scalar update.
BlockState block_forward(diff::Tape& tape, LgeqbParams& p, const BlockState& in,
                         const EdgeIndex& edges, bool irc_safe);

/// Additivity residual |m(i, j+r) - m(i,j) - m(i,r)| measured on a collinear
/// splitting of node j into (z*p_j, (1-z)*p_j) separated by `angle` radians.
/// Reported as a diagnostic; no threshold is asserted.
double collinear_additivity_residual(LgeqbParams& p, const BlockState& state,
                                     int i, int j, double z, double angle,
                                     bool irc_safe);

}  // namespace leq
