#include "piqm/clebsch.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace piqm {

namespace {

bool is_half_integer(double x) { return std::abs(2.0 * x - std::lround(2.0 * x)) < 1e-9; }

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  if (n < 0 || n > 170) throw std::invalid_argument("factorial: out of range");
  return table[static_cast<std::size_t>(n)];
}

// integer value of a half-integer combination such as j1+m1
int as_int(double x) {
  const long r = std::lround(x);
  if (std::abs(x - r) > 1e-9) throw std::invalid_argument("expected integer combination");
  return static_cast<int>(r);
}

// associated Legendre without the Condon-Shortley phase
double plm_positive(int l, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

}  // namespace

double su2_cg(double j1, double m1, double j2, double m2, double j, double m) {
  for (double x : {j1, m1, j2, m2, j, m})
    if (!is_half_integer(x)) throw std::invalid_argument("su2_cg: arguments must be half-integers");
  for (auto [jj, mm] : {std::pair{j1, m1}, {j2, m2}, {j, m}}) {
    const double d = jj - mm;
    if (std::abs(d - std::lround(d)) > 1e-9)
      throw std::invalid_argument("su2_cg: j-m must be an integer");
  }

  if (std::abs(m1 + m2 - m) > 1e-9) return 0.0;
  if (j < std::abs(j1 - j2) - 1e-9 || j > j1 + j2 + 1e-9) return 0.0;
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 || std::abs(m) > j + 1e-9) return 0.0;

  const int a = as_int(j1 + j2 - j);
  const int b = as_int(j1 - j2 + j);
  const int c = as_int(-j1 + j2 + j);
  const int d = as_int(j1 + j2 + j + 1);
  const double delta = std::sqrt(factorial(a) * factorial(b) * factorial(c) / factorial(d));

  const double pre =
      std::sqrt((2.0 * j + 1.0) * factorial(as_int(j1 + m1)) * factorial(as_int(j1 - m1)) *
                factorial(as_int(j2 + m2)) * factorial(as_int(j2 - m2)) *
                factorial(as_int(j + m)) * factorial(as_int(j - m)));

  const int kmin = std::max({0, as_int(j2 - j - m1), as_int(j1 - j + m2)});
  const int kmax = std::min({a, as_int(j1 - m1), as_int(j2 + m2)});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double den = factorial(k) * factorial(a - k) * factorial(as_int(j1 - m1) - k) *
                       factorial(as_int(j2 + m2) - k) * factorial(as_int(j - j2 + m1) + k) *
                       factorial(as_int(j - j1 - m2) + k);
    sum += ((k % 2) ? -1.0 : 1.0) / den;
  }
  return delta * pre * sum;
}

complexd sph_harmonic(int l, int ml, const Vector3d& dir) {
  if (l < 0 || std::abs(ml) > l) throw std::invalid_argument("sph_harmonic: need |ml| <= l");
  const double r = dir.norm();
  if (!(r > 0.0)) throw std::invalid_argument("sph_harmonic: zero direction");
  const double ct = dir[2] / r;
  const double phi = std::atan2(dir[1], dir[0]);
  const int am = std::abs(ml);
  const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * factorial(l - am) / factorial(l + am));
  const double leg = plm_positive(l, am, ct);
  // Condon-Shortley phase on positive ml
  complexd y = ((am % 2) ? -1.0 : 1.0) * norm * leg *
               std::exp(complexd(0.0, 1.0) * static_cast<double>(am) * phi);
  if (ml < 0) y = ((am % 2) ? -1.0 : 1.0) * std::conj(y);
  return y;
}

Vector3d relative_momentum(const FourVector& p1, const FourVector& p2) {
  const FourVector P = p1 + p2;
  const double M = P.mass();
  return boost_canonical(M, P.r).inverse().apply(p1).r;
}

double pair_jacobian(double m1, double m2, double k, double p1, double p2, double P) {
  const double M = omega(m1, k) + omega(m2, k);
  return omega(m1, p1) * omega(m2, p2) * M / (omega(m1, k) * omega(m2, k) * omega(M, P));
}

complexd poincare_cg(const SingleParticle& s1, const SingleParticle& s2,
                     const CoupledLabel& coupled) {
  const CoupledChannel& ch = coupled.chan;
  const FourVector p1 = onshell(s1.m, s1.p);
  const FourVector p2 = onshell(s2.m, s2.p);
  const FourVector Pf = p1 + p2;
  if ((Pf.r - coupled.P).norm() > 1e-8 * (1.0 + Pf.r.norm()))
    throw std::invalid_argument("poincare_cg: total momentum mismatch at evaluation point");

  // forbidden labels give zero, not an error
  if (ch.l < 0 || std::abs(ch.mu) > ch.j + 1e-9) return 0.0;
  if (ch.s < std::abs(s1.j - s2.j) - 1e-9 || ch.s > s1.j + s2.j + 1e-9) return 0.0;
  if (ch.j < std::abs(ch.l - ch.s) - 1e-9 || ch.j > ch.l + ch.s + 1e-9) return 0.0;

  const Vector3d kvec = relative_momentum(p1, p2);
  const double k = kvec.norm();
  const double M = omega(s1.m, k) + omega(s2.m, k);

  const LorentzTransform bp = boost_canonical(M, Pf.r);
  const FourVector k1 = onshell(s1.m, kvec);
  const FourVector k2 = onshell(s2.m, -kvec);

  const Eigen::MatrixXcd d1 = wigner_d(s1.j, wigner_rotation(bp, k1, SpinKind::canonical));
  const Eigen::MatrixXcd d2 = wigner_d(s2.j, wigner_rotation(bp, k2, SpinKind::canonical));

  const double norm = std::sqrt(omega(M, Pf.r.norm()) / M * omega(s1.m, k) * omega(s2.m, k) /
                                (p1.t * p2.t));

  const int i1 = mu_index(s1.j, s1.mu);
  const int i2 = mu_index(s2.j, s2.mu);

  complexd sum = 0.0;
  const int d1n = static_cast<int>(d1.cols());
  const int d2n = static_cast<int>(d2.cols());
  for (int a = 0; a < d1n; ++a) {
    const double nu1 = s1.j - a;
    for (int b = 0; b < d2n; ++b) {
      const double nu2 = s2.j - b;
      const double ms = nu1 + nu2;
      if (std::abs(ms) > ch.s + 1e-9) continue;
      const double ml = ch.mu - ms;
      if (std::abs(ml) > ch.l + 1e-9) continue;
      const double cg_spin = su2_cg(s1.j, nu1, s2.j, nu2, ch.s, ms);
      if (cg_spin == 0.0) continue;
      const double cg_ls = su2_cg(ch.l, ml, ch.s, ms, ch.j, ch.mu);
      if (cg_ls == 0.0) continue;
      sum += d1(i1, a) * d2(i2, b) * cg_spin * cg_ls *
             sph_harmonic(ch.l, static_cast<int>(std::lround(ml)), kvec);
    }
  }
  return norm * sum;
}

namespace {

// build (p1, p2) from total momentum P and relative momentum vector k
void pair_from_jacobi(double m1, double m2, const Vector3d& P, const Vector3d& kvec,
                      FourVector& p1, FourVector& p2) {
  const double M = omega(m1, kvec.norm()) + omega(m2, kvec.norm());
  const LorentzTransform b = boost_canonical(M, P);
  p1 = b.apply(onshell(m1, kvec));
  p2 = b.apply(onshell(m2, -kvec));
}

}  // namespace

double cg_orthonormality_check(double m1, double j1, double m2, double j2, double k,
                               const Vector3d& P, const std::vector<CoupledChannel>& channels,
                               int n_cos, int n_phi) {
  std::vector<double> xc, wc;
  gauss_legendre(n_cos, xc, wc);

  const int nch = static_cast<int>(channels.size());
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(nch, nch);

  const int d1n = static_cast<int>(std::lround(2 * j1)) + 1;
  const int d2n = static_cast<int>(std::lround(2 * j2)) + 1;

  for (int ic = 0; ic < n_cos; ++ic) {
    const double ct = xc[ic];
    const double st = std::sqrt(1.0 - ct * ct);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * M_PI * ip / n_phi;
      const Vector3d kvec(k * st * std::cos(phi), k * st * std::sin(phi), k * ct);
      FourVector p1, p2;
      pair_from_jacobi(m1, m2, P, kvec, p1, p2);
      const double jac = pair_jacobian(m1, m2, k, p1.r.norm(), p2.r.norm(), P.norm());
      const double w = wc[ic] * (2.0 * M_PI / n_phi) * jac;

      // all coefficient values at this direction
      Eigen::MatrixXcd val(nch, d1n * d2n);
      for (int c = 0; c < nch; ++c) {
        CoupledLabel lab{channels[c], P};
        for (int a = 0; a < d1n; ++a)
          for (int b = 0; b < d2n; ++b) {
            SingleParticle sp1{m1, j1, p1.r, j1 - a};
            SingleParticle sp2{m2, j2, p2.r, j2 - b};
            val(c, a * d2n + b) = poincare_cg(sp1, sp2, lab);
          }
      }
      gram += w * val * val.adjoint();
    }
  }

  double dev = 0.0;
  for (int i = 0; i < nch; ++i)
    for (int j = 0; j < nch; ++j) {
      const complexd expect = (i == j) ? 1.0 : 0.0;
      dev = std::max(dev, std::abs(gram(i, j) - expect));
    }
  return dev;
}

double cg_intertwining_deviation(double m1, double j1, double m2, double j2,
                                 const CoupledChannel& chan, const LorentzTransform& lam,
                                 const FourVector& a, double k, const Vector3d& P,
                                 int n_cos, int n_phi) {
  std::vector<double> xc, wc;
  gauss_legendre(n_cos, xc, wc);

  const int d1n = static_cast<int>(std::lround(2 * j1)) + 1;
  const int d2n = static_cast<int>(std::lround(2 * j2)) + 1;
  const int jd = static_cast<int>(std::lround(2 * chan.j)) + 1;

  const complexd I(0.0, 1.0);
  double dev = 0.0;

  for (int ic = 0; ic < n_cos; ++ic) {
    const double ct = xc[ic];
    const double st = std::sqrt(1.0 - ct * ct);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * M_PI * ip / n_phi;
      const Vector3d kvec(k * st * std::cos(phi), k * st * std::sin(phi), k * ct);

      FourVector p1, p2;
      pair_from_jacobi(m1, m2, P, kvec, p1, p2);
      const FourVector P1 = p1 + p2;
      const FourVector q1 = lam.apply(p1);
      const FourVector q2 = lam.apply(p2);
      const FourVector P2 = q1 + q2;

      const Eigen::MatrixXcd dj = wigner_d(chan.j, wigner_rotation(lam, P1, SpinKind::canonical));
      const Eigen::MatrixXcd d1 = wigner_d(j1, wigner_rotation(lam, p1, SpinKind::canonical));
      const Eigen::MatrixXcd d2 = wigner_d(j2, wigner_rotation(lam, p2, SpinKind::canonical));

      const complexd phase = std::exp(I * P2.dot(a));

      for (int ia = 0; ia < d1n; ++ia)
        for (int ib = 0; ib < d2n; ++ib) {
          const SingleParticle sq1{m1, j1, q1.r, j1 - ia};
          const SingleParticle sq2{m2, j2, q2.r, j2 - ib};

          // lhs: coupled-side Wigner function (weight times D^j) applied to
          // the image-point coefficient
          complexd lhs = 0.0;
          for (int im = 0; im < jd; ++im) {
            CoupledChannel cimg = chan;
            cimg.mu = chan.j - im;
            lhs += dj(im, mu_index(chan.j, chan.mu)) *
                   poincare_cg(sq1, sq2, CoupledLabel{cimg, P2.r});
          }
          lhs *= std::sqrt(P2.t / P1.t) * phase;

          // rhs: single-particle Wigner functions applied to the source
          // coefficient; the extra P2.t/P1.t is the delta-conversion Jacobian
          complexd rhs = 0.0;
          for (int ja = 0; ja < d1n; ++ja)
            for (int jb = 0; jb < d2n; ++jb) {
              const SingleParticle sp1{m1, j1, p1.r, j1 - ja};
              const SingleParticle sp2{m2, j2, p2.r, j2 - jb};
              rhs += d1(ia, ja) * d2(ib, jb) * poincare_cg(sp1, sp2, CoupledLabel{chan, P1.r});
            }
          rhs *= (P2.t / P1.t) * std::sqrt(p1.t / q1.t) * std::sqrt(p2.t / q2.t) * phase;

          dev = std::max(dev, std::abs(lhs - rhs));
        }
    }
  }
  return dev;
}

}  // namespace piqm
