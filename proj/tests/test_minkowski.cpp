#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "leq/minkowski.hpp"
#include "leq/rng.hpp"

using namespace leq;

namespace {

FourVector random_vector(Rng& rng) {
  return {rng.uniform(0.5, 40.0), rng.uniform(-10.0, 10.0),
          rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
}

}  // namespace

TEST_SUITE("minkowski") {

TEST_CASE("inner product metric signature") {
  CHECK(mink_inner({1, 0, 0, 0}, {1, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(mink_inner({1, 1, 0, 0}, {1, 1, 0, 0}) == doctest::Approx(0.0));
  CHECK(mink_inner({2, 1, 1, 1}, {1, 1, 1, 1}) == doctest::Approx(2 - 3));
}

TEST_CASE("norm of difference") {
  const FourVector a{2, 0, 0, 0}, b{1, 0, 0, 0};
  CHECK(mink_norm2_diff(a, a) == 0.0);
  CHECK(mink_norm2_diff(a, b) == doctest::Approx(1.0));
  // expansion identity
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const FourVector u = random_vector(rng), v = random_vector(rng);
    const double direct = mink_norm2_diff(u, v);
    const double expanded =
        mink_inner(u, u) - 2 * mink_inner(u, v) + mink_inner(v, v);
    CHECK(std::fabs(direct - expanded) < 1e-9 * std::max(1.0, std::fabs(direct)));
  }
}

TEST_CASE("signed log compression") {
  CHECK(signed_log1p(0.0) == 0.0);
  CHECK(signed_log1p(std::exp(1.0) - 1.0) == doctest::Approx(1.0));
  CHECK(signed_log1p(-(std::exp(2.0) - 1.0)) == doctest::Approx(-2.0));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.uniform(-50.0, 50.0);
    CHECK(signed_log1p(-z) == -signed_log1p(z));          // odd
    CHECK(std::fabs(signed_log1p(z)) <= std::fabs(z));    // compression
    const double z2 = z + rng.uniform(0.0, 5.0) + 1e-9;
    CHECK(signed_log1p(z2) > signed_log1p(z));            // monotone
  }
}

TEST_CASE("invariant mass") {
  CHECK(invariant_mass2({1, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(invariant_mass2({5, 3, 4, 0}) == doctest::Approx(0.0));
}

TEST_CASE("random transforms satisfy the metric invariant") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const LorentzTransform t = random_lorentz(seed, 2.0);
    CHECK(t.metric_residual() < 1e-10);
    CHECK(t.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("random transform determinism and argument checks") {
  const LorentzTransform a = random_lorentz(42, 2.0);
  const LorentzTransform b = random_lorentz(42, 2.0);
  for (int i = 0; i < 16; ++i) CHECK(a.data()[i] == b.data()[i]);
  CHECK_THROWS_AS(random_lorentz(1, -0.5), std::invalid_argument);
}

TEST_CASE("improper transforms appear only behind the flag") {
  bool saw_improper = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const LorentzTransform t = random_lorentz(seed, 1.0, /*allow_improper=*/true);
    CHECK(t.metric_residual() < 1e-10);
    const double det = t.determinant();
    CHECK(std::fabs(std::fabs(det) - 1.0) < 1e-9);
    if (det < 0) saw_improper = true;
    // inner products stay invariant under improper transforms too
    Rng rng(seed);
    const FourVector u = random_vector(rng), v = random_vector(rng);
    CHECK(std::fabs(mink_inner(t.apply(u), t.apply(v)) - mink_inner(u, v)) <
          1e-9 * std::max(1.0, std::fabs(mink_inner(u, v))));
  }
  CHECK(saw_improper);
}

TEST_CASE("zero-rapidity boost with fixed rotations is the identity") {
  const LorentzTransform b = LorentzTransform::boost_z(0.0);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      CHECK(b.at(r, c) == doctest::Approx(r == c ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("boost acts as cosh/sinh on a unit timelike vector") {
  const double phi = 0.7;
  const FourVector v = LorentzTransform::boost_z(phi).apply({1, 0, 0, 0});
  CHECK(v.e == doctest::Approx(std::cosh(phi)));
  CHECK(v.px == doctest::Approx(0.0));
  CHECK(v.py == doctest::Approx(0.0));
  CHECK(v.pz == doctest::Approx(std::sinh(phi)));
}

TEST_CASE("identity transform leaves vectors unchanged") {
  const LorentzTransform id = LorentzTransform::identity();
  const FourVector v{3.0, 1.0, -2.0, 0.5};
  const FourVector w = apply_lorentz(id, v);
  CHECK(w.e == v.e);
  CHECK(w.px == v.px);
  CHECK(w.py == v.py);
  CHECK(w.pz == v.pz);
}

TEST_CASE("invariance of inner products under random transforms") {
  Rng rng(11);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const LorentzTransform t = random_lorentz(s, 2.0);
    const FourVector a = random_vector(rng), b = random_vector(rng);
    const double before = mink_inner(a, b);
    const double after = mink_inner(t.apply(a), t.apply(b));
    CHECK(std::fabs(after - before) < 1e-9 * std::max(1.0, std::fabs(before)));

    const double n_before = mink_norm2_diff(a, b);
    const double n_after = mink_norm2_diff(t.apply(a), t.apply(b));
    CHECK(std::fabs(n_after - n_before) <
          1e-9 * std::max(1.0, std::fabs(n_before)));

    const double m_before = invariant_mass2(a);
    const double m_after = invariant_mass2(t.apply(a));
    CHECK(std::fabs(m_after - m_before) <
          1e-9 * std::max(1.0, std::fabs(m_before)));
  }
}

TEST_CASE("composition matches sequential application") {
  Rng rng(5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const LorentzTransform t1 = random_lorentz(derive_seed(s, "a"), 1.5);
    const LorentzTransform t2 = random_lorentz(derive_seed(s, "b"), 1.5);
    const FourVector v = random_vector(rng);
    const FourVector sequential = t1.apply(t2.apply(v));
    const FourVector composed = t1.compose(t2).apply(v);
    for (int c = 0; c < 4; ++c) {
      CHECK(std::fabs(sequential[c] - composed[c]) < 1e-10 * std::max(1.0, std::fabs(sequential[c])));
    }
  }
}

}  // TEST_SUITE
