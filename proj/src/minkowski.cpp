#include "leq/minkowski.hpp"

#include <cmath>
#include <stdexcept>

namespace leq {

bool FourVector::finite() const {
  return std::isfinite(e) && std::isfinite(px) && std::isfinite(py) &&
         std::isfinite(pz);
}

double mink_inner(const FourVector& a, const FourVector& b) {
  return a.e * b.e - a.px * b.px - a.py * b.py - a.pz * b.pz;
}

double mink_norm2_diff(const FourVector& a, const FourVector& b) {
  const FourVector d = a - b;
  return mink_inner(d, d);
}

double invariant_mass2(const FourVector& v) { return mink_inner(v, v); }

double signed_log1p(double z) {
  return z >= 0.0 ? std::log1p(z) : -std::log1p(-z);
}

double signed_log1p_grad(double z) { return 1.0 / (std::fabs(z) + 1.0); }

LorentzTransform::LorentzTransform() {
  m_.fill(0.0);
  for (int i = 0; i < 4; ++i) m_[4 * i + i] = 1.0;
}

LorentzTransform LorentzTransform::identity() { return LorentzTransform{}; }

LorentzTransform LorentzTransform::boost_z(double rapidity) {
  LorentzTransform t;
  const double ch = std::cosh(rapidity);
  const double sh = std::sinh(rapidity);
  t.at(0, 0) = ch;
  t.at(0, 3) = sh;
  t.at(3, 0) = sh;
  t.at(3, 3) = ch;
  return t;
}

LorentzTransform LorentzTransform::rotation_from_quaternion(double w, double x,
                                                            double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0)) throw std::invalid_argument("rotation: zero quaternion");
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  LorentzTransform t;
  t.at(1, 1) = 1 - 2 * (y * y + z * z);
  t.at(1, 2) = 2 * (x * y - w * z);
  t.at(1, 3) = 2 * (x * z + w * y);
  t.at(2, 1) = 2 * (x * y + w * z);
  t.at(2, 2) = 1 - 2 * (x * x + z * z);
  t.at(2, 3) = 2 * (y * z - w * x);
  t.at(3, 1) = 2 * (x * z - w * y);
  t.at(3, 2) = 2 * (y * z + w * x);
  t.at(3, 3) = 1 - 2 * (x * x + y * y);
  return t;
}

LorentzTransform LorentzTransform::compose(const LorentzTransform& other) const {
  LorentzTransform out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += at(r, k) * other.at(k, c);
      out.at(r, c) = s;
    }
  }
  return out;
}

FourVector LorentzTransform::apply(const FourVector& v) const {
  double out[4];
  for (int r = 0; r < 4; ++r) {
    out[r] = at(r, 0) * v.e + at(r, 1) * v.px + at(r, 2) * v.py + at(r, 3) * v.pz;
  }
  return {out[0], out[1], out[2], out[3]};
}

double LorentzTransform::metric_residual() const {
  // g = diag(+1,-1,-1,-1); residual = max |(M^T g M - g)_{rc}|
  const double g[4] = {1.0, -1.0, -1.0, -1.0};
  double worst = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += at(k, r) * g[k] * at(k, c);
      const double want = (r == c) ? g[r] : 0.0;
      worst = std::max(worst, std::fabs(s - want));
    }
  }
  return worst;
}

double LorentzTransform::determinant() const {
  // cofactor expansion along the first row
  auto minor3 = [this](int r0, int c0) {
    double sub[9];
    int idx = 0;
    for (int r = 0; r < 4; ++r) {
      if (r == r0) continue;
      for (int c = 0; c < 4; ++c) {
        if (c == c0) continue;
        sub[idx++] = at(r, c);
      }
    }
    return sub[0] * (sub[4] * sub[8] - sub[5] * sub[7]) -
           sub[1] * (sub[3] * sub[8] - sub[5] * sub[6]) +
           sub[2] * (sub[3] * sub[7] - sub[4] * sub[6]);
  };
  double det = 0.0;
  double sign = 1.0;
  for (int c = 0; c < 4; ++c) {
    det += sign * at(0, c) * minor3(0, c);
    sign = -sign;
  }
  return det;
}

FourVector apply_lorentz(const LorentzTransform& t, const FourVector& v) {
  return t.apply(v);
}

LorentzTransform random_rotation(Rng& rng) {
  // normalized 4-Gaussian quaternion is Haar-uniform on SO(3)
  double q[4];
  double n = 0.0;
  do {
    for (double& qi : q) qi = rng.normal();
    n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  } while (!(n > 1e-12));
  return LorentzTransform::rotation_from_quaternion(q[0], q[1], q[2], q[3]);
}

LorentzTransform random_lorentz(std::uint64_t seed, double max_rapidity,
                                bool allow_improper) {
  if (!(max_rapidity >= 0.0)) {
    throw std::invalid_argument("random_lorentz: max_rapidity must be >= 0");
  }
  Rng rng(derive_seed(seed, "random_lorentz"));
  const LorentzTransform r1 = random_rotation(rng);
  const double phi = rng.uniform(-max_rapidity, max_rapidity);
  const LorentzTransform b = LorentzTransform::boost_z(phi);
  const LorentzTransform r2 = random_rotation(rng);
  LorentzTransform out = r2.compose(b.compose(r1));
  if (allow_improper && rng.uniform() < 0.5) {
    LorentzTransform parity;
    for (int c = 1; c < 4; ++c) parity.at(c, c) = -1.0;
    out = parity.compose(out);
  }
  if (out.metric_residual() > 1e-10) {
    throw std::runtime_error("random_lorentz: metric residual out of tolerance");
  }
  return out;
}

}  // namespace leq
