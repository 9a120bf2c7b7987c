#include <cmath>

#include "doctest.h"
#include "piqm/clebsch.hpp"

using namespace piqm;

TEST_CASE("su2 clebsch-gordan values and orthogonality") {
  // frozen table values, Condon-Shortley convention
  CHECK(su2_cg(0.5, 0.5, 0.5, -0.5, 0.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(su2_cg(0.5, -0.5, 0.5, 0.5, 0.0, 0.0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(su2_cg(0.5, 0.5, 0.5, 0.5, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(su2_cg(1.0, 0.0, 1.0, 0.0, 2.0, 0.0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(su2_cg(1.0, 0.0, 1.0, 0.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(su2_cg(1.0, 1.0, 0.5, -0.5, 0.5, 0.5) == doctest::Approx(std::sqrt(2.0 / 3.0)));

  // stretched states couple with coefficient one
  for (double j1 : {0.5, 1.0, 1.5})
    for (double j2 : {0.5, 1.0})
      CHECK(su2_cg(j1, j1, j2, j2, j1 + j2, j1 + j2) == doctest::Approx(1.0));

  // selection rules give zero
  CHECK(su2_cg(0.5, 0.5, 0.5, 0.5, 0.0, 1.0) == 0.0);
  CHECK(su2_cg(1.0, 0.0, 1.0, 0.0, 3.0, 0.0) == 0.0);

  CHECK_THROWS_AS(su2_cg(0.3, 0.0, 0.5, 0.5, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(su2_cg(1.0, 0.5, 0.5, 0.5, 1.5, 1.0), std::invalid_argument);

  // row/column orthogonality for all j1, j2 <= 3
  for (double j1 = 0.0; j1 <= 3.0; j1 += 0.5)
    for (double j2 = 0.0; j2 <= 3.0; j2 += 0.5) {
      // rows: fixed (j,m), sum over (m1,m2)
      for (double j = std::abs(j1 - j2); j <= j1 + j2; j += 1.0)
        for (double m = -j; m <= j; m += 1.0) {
          double s = 0.0;
          for (double m1 = -j1; m1 <= j1; m1 += 1.0) {
            const double m2 = m - m1;
            if (std::abs(m2) > j2) continue;
            const double c = su2_cg(j1, m1, j2, m2, j, m);
            s += c * c;
          }
          CHECK(std::abs(s - 1.0) < 1e-13);
        }
      // columns: fixed (m1,m2), sum over j of cg^2
      for (double m1 = -j1; m1 <= j1; m1 += 1.0)
        for (double m2 = -j2; m2 <= j2; m2 += 1.0) {
          double s = 0.0;
          for (double j = std::abs(j1 - j2); j <= j1 + j2; j += 1.0) {
            const double c = su2_cg(j1, m1, j2, m2, j, m1 + m2);
            s += c * c;
          }
          CHECK(std::abs(s - 1.0) < 1e-13);
        }
    }
}

TEST_CASE("spherical harmonics") {
  CHECK(std::abs(sph_harmonic(0, 0, Vector3d(0.3, 0.2, 0.9)) -
                 complexd(1.0 / std::sqrt(4.0 * M_PI), 0.0)) < 1e-14);
  // Y_10 = sqrt(3/4pi) cos(theta)
  const Vector3d n(0.0, 0.6, 0.8);
  CHECK(std::abs(sph_harmonic(1, 0, n) - complexd(std::sqrt(3.0 / (4.0 * M_PI)) * 0.8, 0.0)) <
        1e-14);
  // Y_11 Condon-Shortley sign
  const Vector3d ex(1.0, 0.0, 0.0);
  CHECK(sph_harmonic(1, 1, ex).real() == doctest::Approx(-std::sqrt(3.0 / (8.0 * M_PI))));
  // addition theorem: sum_m |Y_lm|^2 = (2l+1)/4pi
  SplitMix64 rng(41);
  for (int l = 0; l <= 4; ++l) {
    const Vector3d d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    double s = 0.0;
    for (int m = -l; m <= l; ++m) s += std::norm(sph_harmonic(l, m, d));
    CHECK(std::abs(s - (2.0 * l + 1.0) / (4.0 * M_PI)) < 1e-12);
  }
}

TEST_CASE("relative momentum") {
  const double m1 = 0.94, m2 = 0.94;

  // back-to-back pair is already in the rest frame
  const Vector3d q(0.2, -0.4, 0.6);
  const Vector3d k = relative_momentum(onshell(m1, q), onshell(m2, -q));
  CHECK((k - q).norm() < 1e-13);

  // |k| is invariant under overall Lorentz transformations
  SplitMix64 rng(42);
  for (int t = 0; t < 30; ++t) {
    const Vector3d p1(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vector3d p2(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const FourVector f1 = onshell(m1, p1), f2 = onshell(1.2, p2);
    const Vector3d k0 = relative_momentum(f1, f2);
    const auto lam = sample_lorentz(rng);
    const Vector3d k1 = relative_momentum(lam.apply(f1), lam.apply(f2));
    CHECK(std::abs(k0.norm() - k1.norm()) < 1e-11 * (1.0 + k0.norm()));
    // invariant mass relation m(k) = sqrt(-P^2)
    const double mk = omega(m1, k0.norm()) + omega(1.2, k0.norm());
    CHECK(mk == doctest::Approx((f1 + f2).mass()).epsilon(1e-11));
  }

  // nonrelativistic limit: p2 at rest, p1 small -> k = mu/m1 p1 + O(p^3);
  // the remainder shrinks like |p1|^3 under halving
  {
    const double ma = 1.0, mb = 2.0, mu = ma * mb / (ma + mb);
    const Vector3d p1(1e-3, 0.5e-3, -0.3e-3);
    const Vector3d k2 = relative_momentum(onshell(ma, p1), onshell(mb, Vector3d::Zero()));
    const double r1 = (k2 - (mu / ma) * p1).norm();
    CHECK(r1 < std::pow(p1.norm(), 3));
    const Vector3d k3 = relative_momentum(onshell(ma, 0.5 * p1), onshell(mb, Vector3d::Zero()));
    const double r2 = (k3 - (mu / ma) * 0.5 * p1).norm();
    CHECK(r2 < 0.15 * r1);  // ~1/8 from the cubic scaling
  }
}

TEST_CASE("pair jacobian matches finite differences") {
  // d^3p1 d^3p2 = J d^3P d^3k: check det of the numerical 6x6 jacobian of
  // (P, k) with respect to (p1, p2) against 1/J
  const double m1 = 0.94, m2 = 1.31;
  SplitMix64 rng(43);
  for (int t = 0; t < 5; ++t) {
    Vector3d p1(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vector3d p2(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));

    auto map = [&](const Eigen::Matrix<double, 6, 1>& in) {
      const Vector3d a = in.head<3>(), b = in.tail<3>();
      Eigen::Matrix<double, 6, 1> out;
      out.head<3>() = a + b;
      out.tail<3>() = relative_momentum(onshell(m1, a), onshell(m2, b));
      return out;
    };

    Eigen::Matrix<double, 6, 1> x;
    x << p1, p2;
    Eigen::Matrix<double, 6, 6> jac;
    const double h = 1e-6;
    for (int c = 0; c < 6; ++c) {
      auto xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      jac.col(c) = (map(xp) - map(xm)) / (2.0 * h);
    }
    const Vector3d k = relative_momentum(onshell(m1, p1), onshell(m2, p2));
    const double J =
        pair_jacobian(m1, m2, k.norm(), p1.norm(), p2.norm(), (p1 + p2).norm());
    CHECK(std::abs(std::abs(jac.determinant()) - 1.0 / J) < 1e-5 / J);
  }
}

TEST_CASE("poincare cg reductions") {
  const double m1 = 0.94, m2 = 0.94;

  // two spinless particles, l = 0: coefficient is Y00 times the kinematic factor
  {
    SingleParticle s1{m1, 0.0, Vector3d(0.2, 0.1, -0.3), 0.0};
    SingleParticle s2{m2, 0.0, Vector3d(-0.1, 0.4, 0.1), 0.0};
    CoupledLabel c{{0, 0.0, 0.0, 0.0}, s1.p + s2.p};
    const complexd v = poincare_cg(s1, s2, c);
    const Vector3d k = relative_momentum(onshell(m1, s1.p), onshell(m2, s2.p));
    const double P = (s1.p + s2.p).norm();
    const double M = omega(m1, k.norm()) + omega(m2, k.norm());
    const double expect = std::sqrt(omega(M, P) / M * omega(m1, k.norm()) *
                                    omega(m2, k.norm()) /
                                    (omega(m1, s1.p.norm()) * omega(m2, s2.p.norm()))) /
                          std::sqrt(4.0 * M_PI);
    CHECK(std::abs(v - complexd(expect, 0.0)) < 1e-12);
  }

  // P = 0: reduces to the nonrelativistic-style CG chain with Y_lm
  {
    const Vector3d k(0.0, 0.0, 0.35);
    SingleParticle s1{m1, 0.5, k, 0.5};
    SingleParticle s2{m2, 0.5, -k, -0.5};
    CoupledLabel c{{1, 1.0, 1.0, 0.0}, Vector3d::Zero()};
    const complexd v = poincare_cg(s1, s2, c);
    complexd expect = 0.0;
    // D-matrices collapse to the identity in the rest frame
    for (double ms : {-1.0, 0.0, 1.0}) {
      const double cg_s = su2_cg(0.5, 0.5, 0.5, -0.5, 1.0, ms);
      if (ms != 0.0) continue;  // nu1, nu2 fixed by the single-particle labels
      expect += cg_s * su2_cg(1.0, 0.0, 1.0, 0.0, 1.0, 0.0) * sph_harmonic(1, 0, k);
    }
    CHECK(std::abs(v - expect) < 1e-12);
  }

  // kinematically forbidden labels return zero
  {
    SingleParticle s1{m1, 0.0, Vector3d(0.1, 0, 0), 0.0};
    SingleParticle s2{m2, 0.0, Vector3d(0.2, 0, 0), 0.0};
    CoupledLabel c{{0, 1.0, 0.0, 0.0}, s1.p + s2.p};  // s=1 from spinless pair
    CHECK(std::abs(poincare_cg(s1, s2, c)) == 0.0);
    CoupledLabel c2{{1, 0.0, 0.0, 0.0}, s1.p + s2.p};  // j=0 from l=1,s=0
    CHECK(std::abs(poincare_cg(s1, s2, c2)) == 0.0);
  }

  // momentum mismatch is a contract violation
  {
    SingleParticle s1{m1, 0.0, Vector3d(0.1, 0, 0), 0.0};
    SingleParticle s2{m2, 0.0, Vector3d(0.2, 0, 0), 0.0};
    CoupledLabel c{{0, 0.0, 0.0, 0.0}, Vector3d(9.0, 0, 0)};
    CHECK_THROWS_AS(poincare_cg(s1, s2, c), std::invalid_argument);
  }
}

TEST_CASE("poincare cg orthonormality") {
  // spinless, l <= 2
  {
    std::vector<CoupledChannel> chans;
    for (int l = 0; l <= 2; ++l)
      for (double mu = -l; mu <= l; mu += 1.0) chans.push_back({l, 0.0, double(l), mu});
    const double dev = cg_orthonormality_check(0.94, 0.0, 0.94, 0.0, 0.4,
                                               Vector3d(0.3, -0.2, 0.5), chans, 48, 48);
    CHECK(dev < 1e-8);
  }

  // spin-1/2 pair: s in {0,1}, j in {0,1}
  {
    std::vector<CoupledChannel> chans;
    chans.push_back({0, 0.0, 0.0, 0.0});
    for (double mu : {-1.0, 0.0, 1.0}) chans.push_back({0, 1.0, 1.0, mu});
    chans.push_back({1, 1.0, 0.0, 0.0});
    for (double mu : {-1.0, 0.0, 1.0}) chans.push_back({1, 0.0, 1.0, mu});
    const double dev = cg_orthonormality_check(0.94, 0.5, 1.2, 0.5, 0.5,
                                               Vector3d(0.2, 0.4, -0.1), chans, 48, 48);
    CHECK(dev < 1e-7);
  }

  // single-channel diagonal element is positive at a sample point
  {
    SingleParticle s1{0.94, 0.0, Vector3d(0.3, 0.0, 0.1), 0.0};
    SingleParticle s2{0.94, 0.0, Vector3d(-0.1, 0.2, 0.0), 0.0};
    CoupledLabel c{{0, 0.0, 0.0, 0.0}, s1.p + s2.p};
    CHECK(poincare_cg(s1, s2, c).real() > 0.0);
  }
}

TEST_CASE("poincare cg intertwining") {
  SplitMix64 rng(44);
  const double m1 = 0.94, m2 = 1.2;
  const CoupledChannel chan{1, 1.0, 1.0, 1.0};
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const auto lam = sample_lorentz(rng);
    const FourVector a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(-1, 1));
    const Vector3d P(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const double k = rng.uniform(0.1, 0.8);
    worst = std::max(worst, cg_intertwining_deviation(m1, 0.5, m2, 0.5, chan, lam, a, k, P));
  }
  CHECK(worst < 1e-8);

  // spinless channel as well
  const CoupledChannel swave{0, 0.0, 0.0, 0.0};
  const auto lam = sample_lorentz(rng);
  CHECK(cg_intertwining_deviation(0.94, 0.0, 0.94, 0.0, swave, lam,
                                  FourVector(0.3, 0.1, -0.2, 0.5), 0.4,
                                  Vector3d(0.1, 0.2, -0.3)) < 1e-10);
}
