#pragma once

#include <array>
#include <cstdint>

#include "leq/rng.hpp"

namespace leq {

/// Energy-momentum 4-vector (e, px, py, pz) in natural units, GeV.
/// Metric convention (+,-,-,-).
struct FourVector {
  double e = 0.0;
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;

  FourVector() = default;
  FourVector(double e_, double px_, double py_, double pz_)
      : e(e_), px(px_), py(py_), pz(pz_) {}

  FourVector operator+(const FourVector& o) const {
    return {e + o.e, px + o.px, py + o.py, pz + o.pz};
  }
  FourVector operator-(const FourVector& o) const {
    return {e - o.e, px - o.px, py - o.py, pz - o.pz};
  }
  FourVector operator*(double s) const { return {e * s, px * s, py * s, pz * s}; }

  double operator[](int i) const {
    return i == 0 ? e : (i == 1 ? px : (i == 2 ? py : pz));
  }

  bool finite() const;
};

/// Minkowski inner product a.e*b.e - a.px*b.px - a.py*b.py - a.pz*b.pz.
double mink_inner(const FourVector& a, const FourVector& b);

/// Squared Minkowski norm of the difference a - b.
double mink_norm2_diff(const FourVector& a, const FourVector& b);

/// Invariant mass squared, mink_inner(v, v).
double invariant_mass2(const FourVector& v);

/// Odd log compression sgn(z) * log(|z| + 1); stabilizes wide-range inputs.
double signed_log1p(double z);

/// Derivative of signed_log1p: 1 / (|z| + 1).
double signed_log1p_grad(double z);

/// Proper Lorentz transform as a dense 4x4 row-major matrix acting on
/// (e, px, py, pz) column vectors.
class LorentzTransform {
 public:
  LorentzTransform();  // identity

  static LorentzTransform identity();
  static LorentzTransform boost_z(double rapidity);
  /// Spatial rotation block from a unit quaternion (w, x, y, z).
  static LorentzTransform rotation_from_quaternion(double w, double x, double y,
                                                   double z);

  double at(int row, int col) const { return m_[4 * row + col]; }
  double& at(int row, int col) { return m_[4 * row + col]; }

  /// Matrix product this * other (other applied first).
  LorentzTransform compose(const LorentzTransform& other) const;

  FourVector apply(const FourVector& v) const;

  /// Max entrywise deviation of M^T g M from g.
  double metric_residual() const;

  double determinant() const;

  const std::array<double, 16>& data() const { return m_; }

 private:
  std::array<double, 16> m_;
};

FourVector apply_lorentz(const LorentzTransform& t, const FourVector& v);

/// Uniform random spatial rotation (Haar measure via random quaternion).
LorentzTransform random_rotation(Rng& rng);

/// Random proper orthochronous transform R2 * B(phi) * R1 with rapidity
/// phi ~ Uniform(-max_rapidity, max_rapidity). Deterministic in the seed.
/// With allow_improper, a parity flip is composed in with probability 1/2
/// (determinant -1). Throws std::invalid_argument for negative max_rapidity.
LorentzTransform random_lorentz(std::uint64_t seed, double max_rapidity,
                                bool allow_improper = false);

}  // namespace leq
