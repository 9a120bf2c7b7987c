#ifndef PIQM_KINEMATICS_HPP
#define PIQM_KINEMATICS_HPP

// Lorentz transforms, canonical and light-front boosts, Wigner and Melosh
// rotations, and SU(2) Wigner D-matrices.
//
// Conventions (fixed globally):
//   * metric signature (-,+,+,+), so p.p = -m^2 on shell;
//   * rotations are tracked at the SU(2) level; every LorentzTransform
//     carries its SL(2,C) representative, which makes half-integer spin
//     cocycles single valued;
//   * light-front components p^{+-} = p^0 +- p^3; light-front boosts are the
//     lower-triangular SL(2,C) elements with positive diagonal.

#include <complex>

#include <Eigen/Dense>

#include "piqm/numerics.hpp"

namespace piqm {

using complexd = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4d = Eigen::Matrix4d;
using Vector3d = Eigen::Vector3d;

struct FourVector {
  double t = 0.0;
  Vector3d r = Vector3d::Zero();

  FourVector() = default;
  FourVector(double p0, double p1, double p2, double p3) : t(p0), r(p1, p2, p3) {}
  FourVector(double p0, const Vector3d& p) : t(p0), r(p) {}

  double operator[](int mu) const { return mu == 0 ? t : r[mu - 1]; }
  double& operator[](int mu) { return mu == 0 ? t : r[mu - 1]; }

  FourVector operator+(const FourVector& o) const { return {t + o.t, r + o.r}; }
  FourVector operator-(const FourVector& o) const { return {t - o.t, r - o.r}; }

  // Minkowski product with signature (-,+,+,+).
  double dot(const FourVector& o) const { return -t * o.t + r.dot(o.r); }
  double mass() const;  // sqrt(-p.p); throws std::domain_error unless timelike

  double plus() const { return t + r[2]; }
  double minus() const { return t - r[2]; }
  Eigen::Vector2d perp() const { return {r[0], r[1]}; }
};

inline double omega(double m, const Vector3d& p) { return std::sqrt(m * m + p.squaredNorm()); }
inline double omega(double m, double p) { return std::sqrt(m * m + p * p); }

FourVector onshell(double m, const Vector3d& p);
FourVector onshell_front(double m, double p_plus, const Eigen::Vector2d& p_perp);

// 2x2 unitary unimodular matrix.
struct SU2Element {
  Matrix2c u = Matrix2c::Identity();

  SU2Element() = default;
  explicit SU2Element(const Matrix2c& m) : u(m) {}

  SU2Element operator*(const SU2Element& o) const { return SU2Element(u * o.u); }
  SU2Element inverse() const { return SU2Element(u.adjoint()); }
  double unitarity_defect() const;

  static SU2Element axis_angle(const Vector3d& axis, double angle);
  static SU2Element random(std::uint64_t& state);  // Haar-uniform, splitmix draw
};

enum class SpinKind { canonical, lightfront };
enum class TransformKind { rotation, canonical_boost, lightfront_boost, general };

// Proper orthochronous Lorentz transform together with its SL(2,C)
// representative A: X' = A X A^dagger on X = p^0 + p.sigma.
class LorentzTransform {
 public:
  LorentzTransform();

  static LorentzTransform identity();
  static LorentzTransform rotation(const SU2Element& u);
  static LorentzTransform rotation_axis_angle(const Vector3d& axis, double angle);
  // lift of a 4x4 proper orthochronous matrix; branch: boost factored off,
  // rotation lifted with nonnegative quaternion scalar part
  static LorentzTransform from_matrix(const Matrix4d& lam);

  const Matrix4d& matrix() const { return lam_; }
  const Matrix2c& sl2c() const { return a_; }
  TransformKind kind() const { return kind_; }

  FourVector apply(const FourVector& p) const;
  LorentzTransform operator*(const LorentzTransform& o) const;
  LorentzTransform inverse() const;

  // max |Lam^T g Lam - g|
  double metric_defect() const;

 private:
  friend LorentzTransform boost_canonical(double, const Vector3d&);
  friend LorentzTransform boost_lightfront(double, double, const Eigen::Vector2d&);
  LorentzTransform(const Matrix2c& a, TransformKind kind);

  Matrix4d lam_;
  Matrix2c a_;
  TransformKind kind_;
};

// Rotationless boost B_c with B_c(m,0) = (omega_m(p), p).  Symmetric as a
// 4x4 matrix; SL(2,C) representative is positive Hermitian.
LorentzTransform boost_canonical(double m, const Vector3d& p);

// Light-front boost B_f with B_f(m,0) = the on-shell vector of the given
// (p^+, p_perp).  These form a group (no Wigner rotations among themselves).
LorentzTransform boost_lightfront(double m, double p_plus, const Eigen::Vector2d& p_perp);

// B^{-1}(Lam p) Lam B(p) lifted to SU(2), with B of the requested kind.
// p must be timelike with positive mass and energy.
SU2Element wigner_rotation(const LorentzTransform& lam, const FourVector& p, SpinKind kind);

// Melosh rotation B_c^{-1}(p) B_f(p).
SU2Element melosh_rotation(double m, const Vector3d& p);

// Wigner D^j matrix of u, rows/columns ordered mu = j, j-1, ..., -j.
// Computed from the ZYZ Euler decomposition of u with the Wick/Jacobi
// closed form for d^j(beta).
Eigen::MatrixXcd wigner_d(double j, const SU2Element& u);

// index of projection mu in the D-matrix ordering above
inline int mu_index(double j, double mu) { return static_cast<int>(std::lround(j - mu)); }

}  // namespace piqm

#endif
