#include "leq/ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "leq/minkowski.hpp"
#include "leq/rng.hpp"

namespace leq::diff {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes " << a.shape_str() << " and "
     << b.shape_str();
  throw std::invalid_argument(os.str());
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error(op, a, b);
}

/// Uniform [0,1) as a pure function of (seed, index); used by dropout masks.
double hash_uniform(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + index * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

Tensor affine(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t batch = x.rows(), in = x.cols();
  const std::size_t win = w.rows(), out = w.cols();
  if (in != win) shape_error("affine", x, w);
  if (b.defined() && b.size() != out) shape_error("affine bias", w, b);

  Tensor y = Tensor::zeros({batch, out});
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t c = 0; c < out; ++c) {
      double s = b.defined() ? b.values()[c] : 0.0;
      for (std::size_t k = 0; k < in; ++k) s += x.at(r, k) * w.at(k, c);
      y.at(r, c) = s;
    }
  }
  y.check_finite("affine");
  return tape.track(y, {&x, &w, &b}, [x, w, b, y, batch, in, out] {
    const auto& dy = y.grad();
    if (x.tracked()) {
      auto& dx = const_cast<Tensor&>(x).grad();
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t k = 0; k < in; ++k) {
          double s = 0.0;
          for (std::size_t c = 0; c < out; ++c)
            s += dy[r * out + c] * w.at(k, c);
          dx[r * in + k] += s;
        }
    }
    if (w.tracked()) {
      auto& dw = const_cast<Tensor&>(w).grad();
      for (std::size_t k = 0; k < in; ++k)
        for (std::size_t c = 0; c < out; ++c) {
          double s = 0.0;
          for (std::size_t r = 0; r < batch; ++r)
            s += x.at(r, k) * dy[r * out + c];
          dw[k * out + c] += s;
        }
    }
    if (b.defined() && b.tracked()) {
      auto& db = const_cast<Tensor&>(b).grad();
      for (std::size_t c = 0; c < out; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < batch; ++r) s += dy[r * out + c];
        db[c] += s;
      }
    }
  });
}

Tensor activate(Tape& tape, const Tensor& x, Activation kind) {
  Tensor y = Tensor::zeros(x.shape());
  const auto& xv = x.values();
  auto& yv = y.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    switch (kind) {
      case Activation::kRelu:
        yv[i] = xv[i] > 0.0 ? xv[i] : 0.0;
        break;
      case Activation::kTanh:
        yv[i] = std::tanh(xv[i]);
        break;
      case Activation::kSigmoid:
        yv[i] = 1.0 / (1.0 + std::exp(-xv[i]));
        break;
    }
  }
  y.check_finite("activate");
  return tape.track(y, {&x}, [x, y, kind] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    const auto& yv = y.values();
    const auto& xv = x.values();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      double d = 0.0;
      switch (kind) {
        case Activation::kRelu:
          d = xv[i] > 0.0 ? 1.0 : 0.0;
          break;
        case Activation::kTanh:
          d = 1.0 - yv[i] * yv[i];
          break;
        case Activation::kSigmoid:
          d = yv[i] * (1.0 - yv[i]);
          break;
      }
      dx[i] += dy[i] * d;
    }
  });
}

std::pair<Tensor, Tensor> softmax_xent(Tape& tape, const Tensor& logits,
                                       const std::vector<int>& labels) {
  const std::size_t batch = logits.rows(), classes = logits.cols();
  if (labels.size() != batch) {
    throw std::invalid_argument("softmax_xent: label count != batch size");
  }
  for (const int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw std::out_of_range("softmax_xent: label out of range");
    }
  }
  Tensor probs = Tensor::zeros({batch, classes});
  double loss_sum = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    double mx = logits.at(r, 0);
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double e = std::exp(logits.at(r, c) - mx);
      probs.at(r, c) = e;
      z += e;
    }
    for (std::size_t c = 0; c < classes; ++c) probs.at(r, c) /= z;
    // log prob of the true class, recomputed in stabilized form
    const double lp = (logits.at(r, static_cast<std::size_t>(labels[r])) - mx) -
                      std::log(z);
    loss_sum -= lp;
  }
  Tensor loss = Tensor::scalar(loss_sum / static_cast<double>(batch));
  loss.check_finite("softmax_xent");
  Tensor probs_out = probs.detached();
  Tensor tracked = tape.track(
      loss, {&logits}, [logits, loss, probs, labels, batch, classes] {
        if (!logits.tracked()) return;
        const double upstream = loss.grad()[0];
        auto& dl = const_cast<Tensor&>(logits).grad();
        const double inv_b = 1.0 / static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < classes; ++c) {
            const double onehot =
                (static_cast<std::size_t>(labels[r]) == c) ? 1.0 : 0.0;
            dl[r * classes + c] +=
                upstream * inv_b * (probs.at(r, c) - onehot);
          }
      });
  return {tracked, probs_out};
}

Tensor dropout(Tape& tape, const Tensor& x, double p, bool training,
               std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("dropout: p must be in [0, 1)");
  }
  if (!training || p == 0.0) {
    // identity, but still on the gradient path
    Tensor y(x.shape(), x.values());
    return tape.track(y, {&x}, [x, y] {
      if (!x.tracked()) return;
      const auto& dy = y.grad();
      auto& dx = const_cast<Tensor&>(x).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    });
  }
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = hash_uniform(seed, i) >= p ? keep_scale : 0.0;
    (*mask)[i] = m;
    y.values()[i] = x.values()[i] * m;
  }
  return tape.track(y, {&x}, [x, y, mask] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (*mask)[i];
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor y = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = a.values()[i] + b.values()[i];
  y.check_finite("add");
  return tape.track(y, {&a, &b}, [a, b, y] {
    const auto& dy = y.grad();
    if (a.tracked()) {
      auto& da = const_cast<Tensor&>(a).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
    }
    if (b.tracked()) {
      auto& db = const_cast<Tensor&>(b).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
    }
  });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor y = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = a.values()[i] - b.values()[i];
  y.check_finite("sub");
  return tape.track(y, {&a, &b}, [a, b, y] {
    const auto& dy = y.grad();
    if (a.tracked()) {
      auto& da = const_cast<Tensor&>(a).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
    }
    if (b.tracked()) {
      auto& db = const_cast<Tensor&>(b).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
    }
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor y = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = a.values()[i] * b.values()[i];
  y.check_finite("mul");
  return tape.track(y, {&a, &b}, [a, b, y] {
    const auto& dy = y.grad();
    if (a.tracked()) {
      auto& da = const_cast<Tensor&>(a).grad();
      for (std::size_t i = 0; i < dy.size(); ++i)
        da[i] += dy[i] * b.values()[i];
    }
    if (b.tracked()) {
      auto& db = const_cast<Tensor&>(b).grad();
      for (std::size_t i = 0; i < dy.size(); ++i)
        db[i] += dy[i] * a.values()[i];
    }
  });
}

Tensor scale(Tape& tape, const Tensor& x, double c) {
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.values()[i] = x.values()[i] * c;
  y.check_finite("scale");
  return tape.track(y, {&x}, [x, y, c] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * c;
  });
}

Tensor clamp(Tape& tape, const Tensor& x, double lo, double hi) {
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = std::min(hi, std::max(lo, x.values()[i]));
  return tape.track(y, {&x}, [x, y, lo, hi] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const double v = x.values()[i];
      if (v > lo && v < hi) dx[i] += dy[i];
    }
  });
}

Tensor signed_log1p_op(Tape& tape, const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = signed_log1p(x.values()[i]);
  y.check_finite("signed_log1p");
  return tape.track(y, {&x}, [x, y] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < dy.size(); ++i)
      dx[i] += dy[i] * signed_log1p_grad(x.values()[i]);
  });
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts[0], p);
    total += p.cols();
  }
  Tensor y = Tensor::zeros({rows, total});
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p.cols(); ++c)
        y.at(r, off + c) = p.at(r, c);
    off += p.cols();
  }
  auto parts_copy = parts;
  return tape.track_many(y, parts, [parts_copy, y, rows] {
    const std::size_t total = y.cols();
    const auto& dy = y.grad();
    std::size_t off = 0;
    for (const Tensor& p : parts_copy) {
      if (p.tracked()) {
        auto& dp = const_cast<Tensor&>(p).grad();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < p.cols(); ++c)
            dp[r * p.cols() + c] += dy[r * total + off + c];
      }
      off += p.cols();
    }
  });
}

Tensor gather_rows(Tape& tape, const Tensor& x, const std::vector<int>& index) {
  const std::size_t cols = x.cols();
  Tensor y = Tensor::zeros({index.size(), cols});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= x.rows()) {
      throw std::out_of_range("gather_rows: row index out of range");
    }
    for (std::size_t c = 0; c < cols; ++c)
      y.at(r, c) = x.at(static_cast<std::size_t>(index[r]), c);
  }
  return tape.track(y, {&x}, [x, y, index, cols] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t r = 0; r < index.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c)
        dx[static_cast<std::size_t>(index[r]) * cols + c] += dy[r * cols + c];
  });
}

Tensor scatter_add_rows(Tape& tape, const Tensor& src,
                        const std::vector<int>& index, std::size_t n_rows) {
  if (index.size() != src.rows()) {
    throw std::invalid_argument("scatter_add_rows: index count != src rows");
  }
  const std::size_t cols = src.cols();
  Tensor y = Tensor::zeros({n_rows, cols});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= n_rows) {
      throw std::out_of_range("scatter_add_rows: row index out of range");
    }
    for (std::size_t c = 0; c < cols; ++c)
      y.at(static_cast<std::size_t>(index[r]), c) += src.at(r, c);
  }
  return tape.track(y, {&src}, [src, y, index, cols] {
    if (!src.tracked()) return;
    const auto& dy = y.grad();
    auto& ds = const_cast<Tensor&>(src).grad();
    for (std::size_t r = 0; r < index.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c)
        ds[r * cols + c] += dy[static_cast<std::size_t>(index[r]) * cols + c];
  });
}

Tensor row_broadcast_mul(Tape& tape, const Tensor& x, const Tensor& s) {
  if (s.rows() != x.rows() || s.cols() != 1) shape_error("row_broadcast_mul", x, s);
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      y.at(r, c) = x.at(r, c) * s.values()[r];
  y.check_finite("row_broadcast_mul");
  return tape.track(y, {&x, &s}, [x, s, y] {
    const auto& dy = y.grad();
    const std::size_t cols = x.cols();
    if (x.tracked()) {
      auto& dx = const_cast<Tensor&>(x).grad();
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
          dx[r * cols + c] += dy[r * cols + c] * s.values()[r];
    }
    if (s.tracked()) {
      auto& ds = const_cast<Tensor&>(s).grad();
      for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c)
          acc += dy[r * cols + c] * x.at(r, c);
        ds[r] += acc;
      }
    }
  });
}

Tensor minkowski_dot_rows(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != 4 || b.cols() != 4 || a.rows() != b.rows()) {
    shape_error("minkowski_dot_rows", a, b);
  }
  static constexpr double kMetric[4] = {1.0, -1.0, -1.0, -1.0};
  Tensor y = Tensor::zeros({a.rows(), 1});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) s += kMetric[c] * a.at(r, c) * b.at(r, c);
    y.values()[r] = s;
  }
  y.check_finite("minkowski_dot_rows");
  return tape.track(y, {&a, &b}, [a, b, y] {
    const auto& dy = y.grad();
    if (a.tracked()) {
      auto& da = const_cast<Tensor&>(a).grad();
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < 4; ++c)
          da[r * 4 + c] += dy[r] * kMetric[c] * b.at(r, c);
    }
    if (b.tracked()) {
      auto& db = const_cast<Tensor&>(b).grad();
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < 4; ++c)
          db[r * 4 + c] += dy[r] * kMetric[c] * a.at(r, c);
    }
  });
}

Tensor div_cols(Tape& tape, const Tensor& num, const Tensor& den) {
  require_same_shape("div_cols", num, den);
  Tensor y = Tensor::zeros(num.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values()[i] = num.values()[i] / den.values()[i];
  y.check_finite("div_cols");
  return tape.track(y, {&num, &den}, [num, den, y] {
    const auto& dy = y.grad();
    if (num.tracked()) {
      auto& dn = const_cast<Tensor&>(num).grad();
      for (std::size_t i = 0; i < dy.size(); ++i)
        dn[i] += dy[i] / den.values()[i];
    }
    if (den.tracked()) {
      auto& dd = const_cast<Tensor&>(den).grad();
      for (std::size_t i = 0; i < dy.size(); ++i) {
        const double d = den.values()[i];
        dd[i] -= dy[i] * num.values()[i] / (d * d);
      }
    }
  });
}

Tensor mean_rows(Tape& tape, const Tensor& x) {
  const std::size_t n = x.rows(), cols = x.cols();
  Tensor y = Tensor::zeros({1, cols});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < cols; ++c) y.values()[c] += x.at(r, c);
  for (std::size_t c = 0; c < cols; ++c) y.values()[c] /= static_cast<double>(n);
  return tape.track(y, {&x}, [x, y, n, cols] {
    if (!x.tracked()) return;
    const auto& dy = y.grad();
    auto& dx = const_cast<Tensor&>(x).grad();
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] += dy[c] * inv;
  });
}

Tensor sum_all(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (const double v : x.values()) s += v;
  Tensor y = Tensor::scalar(s);
  return tape.track(y, {&x}, [x, y] {
    if (!x.tracked()) return;
    const double up = y.grad()[0];
    auto& dx = const_cast<Tensor&>(x).grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up;
  });
}

}  // namespace leq::diff
