#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "leq/tensor.hpp"

namespace leq::diff {

enum class Activation { kRelu, kTanh, kSigmoid };

/// y = x . w (+ b broadcast over rows). x: [B x I], w: [I x O], b: [O] or [1 x O].
/// Pass an undefined Tensor{} for no bias.
Tensor affine(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

/// Elementwise activation.
Tensor activate(Tape& tape, const Tensor& x, Activation kind);

/// Numerically stabilized softmax + mean cross-entropy over the batch.
/// Returns {scalar loss, detached probabilities [B x C]}.
std::pair<Tensor, Tensor> softmax_xent(Tape& tape, const Tensor& logits,
                                       const std::vector<int>& labels);

/// Inverted dropout: training mode zeroes elements with probability p and
/// scales survivors by 1/(1-p); eval mode is the identity. The mask is a pure
/// function of (seed, element index), independent of thread scheduling.
Tensor dropout(Tape& tape, const Tensor& x, double p, bool training,
               std::uint64_t seed);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double c);

/// Elementwise clamp to [lo, hi]; gradient passes through interior points.
Tensor clamp(Tape& tape, const Tensor& x, double lo, double hi);

/// Elementwise sgn(z)*log(|z|+1).
Tensor signed_log1p_op(Tape& tape, const Tensor& x);

/// Column-wise concatenation of matrices with equal row counts.
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);

/// y[r, :] = x[index[r], :].
Tensor gather_rows(Tape& tape, const Tensor& x, const std::vector<int>& index);

/// out[index[r], :] += src[r, :]; out has n_rows rows. Accumulation follows
/// source-row order, so results do not depend on scheduling.
Tensor scatter_add_rows(Tape& tape, const Tensor& src,
                        const std::vector<int>& index, std::size_t n_rows);

/// y[r, c] = x[r, c] * s[r, 0] with s: [R x 1].
Tensor row_broadcast_mul(Tape& tape, const Tensor& x, const Tensor& s);

/// Row-wise Minkowski inner product of [R x 4] matrices -> [R x 1].
Tensor minkowski_dot_rows(Tape& tape, const Tensor& a, const Tensor& b);

/// y = num / den elementwise for [R x 1] columns.
Tensor div_cols(Tape& tape, const Tensor& num, const Tensor& den);

/// Column mean over rows: [N x C] -> [1 x C].
Tensor mean_rows(Tape& tape, const Tensor& x);

/// Scalar sum of all entries.
Tensor sum_all(Tape& tape, const Tensor& x);

}  // namespace leq::diff
