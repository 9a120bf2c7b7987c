#include <cmath>

#include "doctest.h"
#include "piqm/irreps.hpp"
#include "piqm/kinematics.hpp"

using namespace piqm;

namespace {

Vector3d random_momentum(SplitMix64& rng, double scale) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

}  // namespace

TEST_CASE("canonical boost basics") {
  CHECK_THROWS_AS(boost_canonical(-1.0, Vector3d(0, 0, 1)), std::invalid_argument);

  // zero momentum gives the identity
  const auto b0 = boost_canonical(1.0, Vector3d::Zero());
  CHECK((b0.matrix() - Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  // 3-4-5 triple: m=1, p=(0,0,0.75) -> time component 1.25
  const auto b = boost_canonical(1.0, Vector3d(0, 0, 0.75));
  const FourVector img = b.apply(FourVector(1.0, 0, 0, 0));
  CHECK(img.t == doctest::Approx(1.25).epsilon(1e-13));
  CHECK(img.r[2] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK((b.matrix() - b.matrix().transpose()).cwiseAbs().maxCoeff() < 1e-13);

  // rotational covariance R B(p) R^-1 = B(Rp)
  SplitMix64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const Vector3d p = random_momentum(rng, 2.0);
    const auto r = LorentzTransform::rotation(SU2Element::random(rng.state));
    const auto lhs = r * boost_canonical(1.3, p) * r.inverse();
    const auto rhs = boost_canonical(1.3, r.apply(FourVector(0.0, p)).r);
    CHECK((lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("light-front boost basics") {
  CHECK_THROWS_AS(boost_lightfront(1.0, -0.5, Eigen::Vector2d(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(boost_lightfront(0.0, 1.0, Eigen::Vector2d(0, 0)), std::invalid_argument);

  // rest kinematics give the identity
  const auto b0 = boost_lightfront(1.0, 1.0, Eigen::Vector2d(0, 0));
  CHECK((b0.matrix() - Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  // defining property: image of (m,0,0,0) has the requested p+ and p_perp
  SplitMix64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const double m = rng.uniform(0.3, 2.0);
    const double pp = rng.uniform(0.2, 4.0);
    const Eigen::Vector2d perp(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const auto b = boost_lightfront(m, pp, perp);
    const FourVector img = b.apply(FourVector(m, 0, 0, 0));
    CHECK(std::abs(img.plus() - pp) < 1e-12 * pp);
    CHECK((img.perp() - perp).norm() < 1e-12);
    CHECK(b.metric_defect() < 1e-12);
  }

  // group property: the product of two light-front boosts is one
  for (int t = 0; t < 20; ++t) {
    const auto b1 = boost_lightfront(1.0, rng.uniform(0.2, 3.0),
                                     {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    const auto b2 = boost_lightfront(1.0, rng.uniform(0.2, 3.0),
                                     {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    const auto prod = b2 * b1;
    CHECK(prod.kind() == TransformKind::lightfront_boost);
    // lower-triangular with positive diagonal in SL(2,C)
    CHECK(std::abs(prod.sl2c()(0, 1)) < 1e-13);
    CHECK(prod.sl2c()(0, 0).real() > 0.0);
    // and therefore no Wigner rotation on a rest vector boosted by it
    const FourVector img = prod.apply(FourVector(1.0, 0, 0, 0));
    const auto b3 = boost_lightfront(1.0, img.plus(), img.perp());
    CHECK((prod.matrix() - b3.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lorentz transform invariants and lifts") {
  SplitMix64 rng(23);
  for (int t = 0; t < 50; ++t) {
    const auto lam = sample_lorentz(rng);
    CHECK(lam.metric_defect() < 1e-12);
    CHECK(lam.matrix()(0, 0) >= 1.0 - 1e-12);
    CHECK(lam.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-10));
    // SL(2,C) representative reproduces the 4x4 after a round trip
    const auto relift = LorentzTransform::from_matrix(lam.matrix());
    CHECK((relift.matrix() - lam.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("wigner rotation") {
  SplitMix64 rng(24);
  const double m = 0.94;

  // identity transform
  const FourVector p0 = onshell(m, Vector3d(0.3, -0.2, 0.5));
  CHECK(wigner_rotation(LorentzTransform::identity(), p0, SpinKind::canonical)
            .unitarity_defect() < 1e-13);
  CHECK((wigner_rotation(LorentzTransform::identity(), p0, SpinKind::canonical).u -
         Matrix2c::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-13);

  // canonical spin: rotation Wigner-rotates by the rotation itself
  for (int t = 0; t < 20; ++t) {
    const SU2Element u = SU2Element::random(rng.state);
    const auto r = LorentzTransform::rotation(u);
    const FourVector p = onshell(m, random_momentum(rng, 2.0));
    const SU2Element rw = wigner_rotation(r, p, SpinKind::canonical);
    CHECK((rw.u - u.u).cwiseAbs().maxCoeff() < 1e-12);
    // light-front spin: generally not equal to the rotation
    const SU2Element rwf = wigner_rotation(r, p, SpinKind::lightfront);
    CHECK(rwf.unitarity_defect() < 1e-12);
  }

  // collinear canonical boosts commute: boost along p acting on p
  for (int t = 0; t < 20; ++t) {
    const Vector3d p = random_momentum(rng, 2.0);
    const auto b = boost_canonical(1.0, 1.7 * p.normalized());
    const SU2Element rw = wigner_rotation(b, onshell(m, p), SpinKind::canonical);
    CHECK((rw.u - Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-11);
  }

  // cocycle for both spin kinds
  for (int t = 0; t < 200; ++t) {
    const auto l1 = sample_lorentz(rng);
    const auto l2 = sample_lorentz(rng);
    const FourVector p = onshell(m, random_momentum(rng, 2.0));
    for (auto kind : {SpinKind::canonical, SpinKind::lightfront}) {
      const SU2Element lhs = wigner_rotation(l2 * l1, p, kind);
      const SU2Element rhs = wigner_rotation(l2, l1.apply(p), kind) * wigner_rotation(l1, p, kind);
      CHECK((lhs.u - rhs.u).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  // spacelike argument rejected
  CHECK_THROWS_AS(wigner_rotation(LorentzTransform::identity(), FourVector(0.1, 0, 0, 1.0),
                                  SpinKind::canonical),
                  std::domain_error);
}

TEST_CASE("melosh rotation") {
  CHECK_THROWS_AS(melosh_rotation(-1.0, Vector3d(0, 0, 0)), std::invalid_argument);

  // p = 0 and longitudinal p give the identity
  CHECK((melosh_rotation(1.0, Vector3d::Zero()).u - Matrix2c::Identity()).cwiseAbs().maxCoeff() <
        1e-13);
  CHECK((melosh_rotation(0.7, Vector3d(0, 0, 1.3)).u - Matrix2c::Identity()).cwiseAbs().maxCoeff() <
        1e-12);

  SplitMix64 rng(25);
  for (int t = 0; t < 30; ++t) {
    const SU2Element rm = melosh_rotation(0.94, random_momentum(rng, 2.0));
    CHECK(rm.unitarity_defect() < 1e-12);
  }
}

TEST_CASE("wigner D matrices") {
  SplitMix64 rng(26);

  CHECK_THROWS_AS(wigner_d(0.3, SU2Element()), std::invalid_argument);
  CHECK_THROWS_AS(wigner_d(-1.0, SU2Element()), std::invalid_argument);

  // j = 0 is scalar 1; j = 1/2 is the defining representation
  for (int t = 0; t < 20; ++t) {
    const SU2Element u = SU2Element::random(rng.state);
    const auto d0 = wigner_d(0.0, u);
    CHECK(std::abs(d0(0, 0) - 1.0) < 1e-14);
    const auto dh = wigner_d(0.5, u);
    CHECK((dh - u.u).cwiseAbs().maxCoeff() < 1e-12);
  }

  // j = 1 rotation about z is diagonal with phases
  const double th = 0.77;
  const auto dz = wigner_d(1.0, SU2Element::axis_angle(Vector3d(0, 0, 1), th));
  const complexd I(0, 1);
  CHECK(std::abs(dz(0, 0) - std::exp(-I * th)) < 1e-13);
  CHECK(std::abs(dz(1, 1) - 1.0) < 1e-13);
  CHECK(std::abs(dz(2, 2) - std::exp(I * th)) < 1e-13);
  CHECK(dz.cwiseAbs().sum() == doctest::Approx(3.0).epsilon(1e-12));

  // homomorphism and unitarity for j in {1/2, 1, 3/2, 2}
  for (double j : {0.5, 1.0, 1.5, 2.0}) {
    for (int t = 0; t < 25; ++t) {
      const SU2Element u1 = SU2Element::random(rng.state);
      const SU2Element u2 = SU2Element::random(rng.state);
      const auto d12 = wigner_d(j, u2 * u1);
      const auto prod = (wigner_d(j, u2) * wigner_d(j, u1)).eval();
      CHECK((d12 - prod).cwiseAbs().maxCoeff() < 1e-11);
      const auto uu = (wigner_d(j, u1) * wigner_d(j, u1).adjoint()).eval();
      CHECK((uu - Eigen::MatrixXcd::Identity(uu.rows(), uu.cols())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("four vector mass and front components") {
  const FourVector p = onshell_front(0.5, 1.2, {0.3, -0.4});
  CHECK(p.mass() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.plus() == doctest::Approx(1.2).epsilon(1e-12));
  CHECK_THROWS_AS(FourVector(1.0, 0, 0, 2.0).mass(), std::domain_error);
  CHECK_THROWS_AS(onshell_front(1.0, -0.2, {0, 0}), std::domain_error);
}
