#include "piqm/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace piqm {

namespace {

const complexd kI(0.0, 1.0);

// X = p^0 I + p.sigma
Matrix2c hermitian_of(const FourVector& p) {
  Matrix2c x;
  x << complexd(p.t + p.r[2], 0.0), complexd(p.r[0], -p.r[1]),
      complexd(p.r[0], p.r[1]), complexd(p.t - p.r[2], 0.0);
  return x;
}

FourVector vector_of(const Matrix2c& x) {
  FourVector p;
  p.t = 0.5 * std::real(x(0, 0) + x(1, 1));
  p.r[0] = std::real(x(0, 1) + x(1, 0)) * 0.5;
  p.r[1] = std::real((x(1, 0) - x(0, 1)) / kI) * 0.5;
  p.r[2] = 0.5 * std::real(x(0, 0) - x(1, 1));
  return p;
}

Matrix2c sigma(int mu) {
  Matrix2c s = Matrix2c::Zero();
  switch (mu) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -kI, kI, 0; break;
    case 3: s << 1, 0, 0, -1; break;
  }
  return s;
}

Matrix4d matrix_from_sl2c(const Matrix2c& a) {
  Matrix4d lam;
  const Matrix2c ad = a.adjoint();
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      lam(mu, nu) = 0.5 * std::real((sigma(mu) * a * sigma(nu) * ad).trace());
  return lam;
}

// SL(2,C) inverse via the adjugate (det = 1).
Matrix2c sl2c_inverse(const Matrix2c& a) {
  Matrix2c inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv;
}

Matrix2c sl2c_canonical_boost(double m, const Vector3d& p) {
  const double w = omega(m, p);
  const double norm = std::sqrt(2.0 * m * (m + w));
  Matrix2c a = (m + w) * Matrix2c::Identity();
  a += p[0] * sigma(1) + p[1] * sigma(2) + p[2] * sigma(3);
  return a / norm;
}

Matrix2c sl2c_front_boost(double m, double p_plus, const Eigen::Vector2d& p_perp) {
  Matrix2c a = Matrix2c::Zero();
  const double eta = std::sqrt(p_plus / m);
  a(0, 0) = eta;
  a(1, 1) = 1.0 / eta;
  a(1, 0) = complexd(p_perp[0], p_perp[1]) / std::sqrt(m * p_plus);
  return a;
}

}  // namespace

double FourVector::mass() const {
  const double m2 = -dot(*this);
  if (!(m2 > 0.0) || !(t > 0.0))
    throw std::domain_error("FourVector::mass: vector is not positive-energy timelike");
  return std::sqrt(m2);
}

FourVector onshell(double m, const Vector3d& p) { return {omega(m, p), p}; }

FourVector onshell_front(double m, double p_plus, const Eigen::Vector2d& p_perp) {
  if (!(p_plus > 0.0)) throw std::domain_error("onshell_front: p+ must be positive");
  const double p_minus = (m * m + p_perp.squaredNorm()) / p_plus;
  FourVector p;
  p.t = 0.5 * (p_plus + p_minus);
  p.r[0] = p_perp[0];
  p.r[1] = p_perp[1];
  p.r[2] = 0.5 * (p_plus - p_minus);
  return p;
}

double SU2Element::unitarity_defect() const {
  const double du = (u * u.adjoint() - Matrix2c::Identity()).cwiseAbs().maxCoeff();
  const double dd = std::abs(u.determinant() - 1.0);
  return std::max(du, dd);
}

SU2Element SU2Element::axis_angle(const Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw std::invalid_argument("SU2Element::axis_angle: zero axis");
  const Vector3d nh = axis / n;
  Matrix2c u = std::cos(0.5 * angle) * Matrix2c::Identity();
  u -= kI * std::sin(0.5 * angle) * (nh[0] * sigma(1) + nh[1] * sigma(2) + nh[2] * sigma(3));
  return SU2Element(u);
}

SU2Element SU2Element::random(std::uint64_t& state) {
  SplitMix64 rng(0);
  rng.state = state;
  // Haar measure from a uniform quaternion on S^3.
  double q[4];
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& qi : q) {
      // Box-Muller pairs drawn sequentially
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      qi = std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(2.0 * M_PI * u2);
      n2 += qi * qi;
    }
  } while (!(n2 > 1e-12));
  state = rng.state;
  const double n = std::sqrt(n2);
  Matrix2c u = (q[0] / n) * Matrix2c::Identity();
  u -= kI * (q[1] / n * sigma(1) + q[2] / n * sigma(2) + q[3] / n * sigma(3));
  return SU2Element(u);
}

LorentzTransform::LorentzTransform()
    : lam_(Matrix4d::Identity()), a_(Matrix2c::Identity()), kind_(TransformKind::rotation) {}

LorentzTransform::LorentzTransform(const Matrix2c& a, TransformKind kind)
    : lam_(matrix_from_sl2c(a)), a_(a), kind_(kind) {}

LorentzTransform LorentzTransform::identity() { return LorentzTransform(); }

LorentzTransform LorentzTransform::rotation(const SU2Element& u) {
  return LorentzTransform(u.u, TransformKind::rotation);
}

LorentzTransform LorentzTransform::rotation_axis_angle(const Vector3d& axis, double angle) {
  return rotation(SU2Element::axis_angle(axis, angle));
}

LorentzTransform LorentzTransform::from_matrix(const Matrix4d& lam) {
  Matrix4d g = Matrix4d::Identity();
  g(0, 0) = -1.0;
  if ((lam.transpose() * g * lam - g).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("LorentzTransform::from_matrix: not a Lorentz matrix");
  if (lam(0, 0) < 1.0 - 1e-12 || lam.determinant() < 0.0)
    throw std::invalid_argument("LorentzTransform::from_matrix: not proper orthochronous");

  // factor off the boost carrying (1,0,0,0) -> first column
  const Vector3d u(lam(1, 0), lam(2, 0), lam(3, 0));
  const Matrix2c ab = sl2c_canonical_boost(1.0, u);
  const Matrix4d r4 = matrix_from_sl2c(sl2c_inverse(ab)) * lam;

  // quaternion lift of the rotation block with w >= 0
  Eigen::Matrix3d r = r4.block<3, 3>(1, 1);
  double w = std::sqrt(std::max(0.0, 1.0 + r.trace())) / 2.0;
  double x, y, z;
  if (w > 1e-8) {
    x = (r(2, 1) - r(1, 2)) / (4.0 * w);
    y = (r(0, 2) - r(2, 0)) / (4.0 * w);
    z = (r(1, 0) - r(0, 1)) / (4.0 * w);
  } else {
    // angle ~ pi: diagonal dominates; make first nonzero component positive
    x = std::sqrt(std::max(0.0, 1.0 + r(0, 0) - r(1, 1) - r(2, 2))) / 2.0;
    y = std::sqrt(std::max(0.0, 1.0 - r(0, 0) + r(1, 1) - r(2, 2))) / 2.0;
    z = std::sqrt(std::max(0.0, 1.0 - r(0, 0) - r(1, 1) + r(2, 2))) / 2.0;
    if (x >= y && x >= z) {
      y = std::copysign(y, r(0, 1) + r(1, 0));
      z = std::copysign(z, r(0, 2) + r(2, 0));
    } else if (y >= z) {
      x = std::copysign(x, r(0, 1) + r(1, 0));
      z = std::copysign(z, r(1, 2) + r(2, 1));
    } else {
      x = std::copysign(x, r(0, 2) + r(2, 0));
      y = std::copysign(y, r(1, 2) + r(2, 1));
    }
  }
  Matrix2c au = w * Matrix2c::Identity() - kI * (x * sigma(1) + y * sigma(2) + z * sigma(3));
  au /= std::sqrt(std::abs(au.determinant()));
  return LorentzTransform(ab * au, TransformKind::general);
}

FourVector LorentzTransform::apply(const FourVector& p) const {
  Eigen::Vector4d v(p.t, p.r[0], p.r[1], p.r[2]);
  Eigen::Vector4d w = lam_ * v;
  return {w[0], Vector3d(w[1], w[2], w[3])};
}

LorentzTransform LorentzTransform::operator*(const LorentzTransform& o) const {
  TransformKind k = TransformKind::general;
  if (kind_ == o.kind_ &&
      (kind_ == TransformKind::rotation || kind_ == TransformKind::lightfront_boost))
    k = kind_;
  return LorentzTransform(a_ * o.a_, k);
}

LorentzTransform LorentzTransform::inverse() const {
  return LorentzTransform(sl2c_inverse(a_), kind_);
}

double LorentzTransform::metric_defect() const {
  Matrix4d g = Matrix4d::Identity();
  g(0, 0) = -1.0;
  return (lam_.transpose() * g * lam_ - g).cwiseAbs().maxCoeff();
}

LorentzTransform boost_canonical(double m, const Vector3d& p) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("boost_canonical: mass must be positive");
  return LorentzTransform(sl2c_canonical_boost(m, p), TransformKind::canonical_boost);
}

LorentzTransform boost_lightfront(double m, double p_plus, const Eigen::Vector2d& p_perp) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("boost_lightfront: mass must be positive");
  if (!(p_plus > 0.0))
    throw std::invalid_argument("boost_lightfront: p+ must be positive");
  return LorentzTransform(sl2c_front_boost(m, p_plus, p_perp), TransformKind::lightfront_boost);
}

SU2Element wigner_rotation(const LorentzTransform& lam, const FourVector& p, SpinKind kind) {
  const double m = p.mass();  // throws std::domain_error off shell
  const FourVector q = lam.apply(p);
  Matrix2c b1, b2;
  if (kind == SpinKind::canonical) {
    b1 = sl2c_canonical_boost(m, p.r);
    b2 = sl2c_canonical_boost(m, q.r);
  } else {
    b1 = sl2c_front_boost(m, p.plus(), p.perp());
    b2 = sl2c_front_boost(m, q.plus(), q.perp());
  }
  return SU2Element(sl2c_inverse(b2) * lam.sl2c() * b1);
}

SU2Element melosh_rotation(double m, const Vector3d& p) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("melosh_rotation: mass must be positive");
  const FourVector pv = onshell(m, p);
  return SU2Element(sl2c_inverse(sl2c_canonical_boost(m, p)) *
                    sl2c_front_boost(m, pv.plus(), pv.perp()));
}

Eigen::MatrixXcd wigner_d(double j, const SU2Element& u) {
  const double twoj = 2.0 * j;
  if (j < 0.0 || std::abs(twoj - std::lround(twoj)) > 1e-9)
    throw std::invalid_argument("wigner_d: 2j must be a nonnegative integer");
  const int tj = static_cast<int>(std::lround(twoj));
  const int dim = tj + 1;

  // ZYZ Euler angles: u = e^{-i a sz/2} e^{-i b sy/2} e^{-i g sz/2}
  const complexd a = u.u(0, 0);
  const complexd c = u.u(1, 0);
  const double beta = 2.0 * std::atan2(std::abs(c), std::abs(a));
  double alpha, gamma;
  if (std::abs(c) == 0.0) {
    alpha = -2.0 * std::arg(a);
    gamma = 0.0;
  } else if (std::abs(a) == 0.0) {
    alpha = 2.0 * std::arg(c);
    gamma = 0.0;
  } else {
    alpha = std::arg(c) - std::arg(a);
    gamma = -std::arg(a) - std::arg(c);
  }

  std::vector<double> fact(2 * tj + 2, 1.0);
  for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

  const double cb = std::cos(0.5 * beta);
  const double sb = std::sin(0.5 * beta);

  Eigen::MatrixXcd d(dim, dim);
  for (int row = 0; row < dim; ++row) {
    const double mu = j - row;  // bra projection
    for (int col = 0; col < dim; ++col) {
      const double mup = j - col;  // ket projection
      // integer bookkeeping: j+mu = tj-row etc.
      const int jpmu = tj - row, jmmu = row;
      const int jpmup = tj - col, jmmup = col;
      const int smin = std::max(0, static_cast<int>(std::lround(mup - mu)));
      const int smax = std::min(jpmup, jmmu);
      double sum = 0.0;
      for (int s = smin; s <= smax; ++s) {
        const int dmu = static_cast<int>(std::lround(mu - mup));  // mu - mu'
        const double sign = ((dmu + s) % 2 == 0) ? 1.0 : -1.0;
        const double den =
            fact[jpmup - s] * fact[s] * fact[dmu + s] * fact[jmmu - s];
        const int cpow = tj - dmu - 2 * s;
        const int spow = dmu + 2 * s;
        sum += sign / den * std::pow(cb, cpow) * std::pow(sb, spow);
      }
      const double norm = std::sqrt(fact[jpmu] * fact[jmmu] * fact[jpmup] * fact[jmmup]);
      d(row, col) = norm * sum * std::exp(-kI * (mu * alpha + mup * gamma));
    }
  }
  return d;
}

}  // namespace piqm
