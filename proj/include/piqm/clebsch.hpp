#ifndef PIQM_CLEBSCH_HPP
#define PIQM_CLEBSCH_HPP

// SU(2) Clebsch-Gordan coefficients, spherical harmonics, the relativistic
// relative-momentum map, and the two-body Poincare group Clebsch-Gordan
// coefficients in the instant-form canonical-spin basis.
//
// The two-body coefficient is built constructively: boost the total momentum
// to rest, Wigner-rotate the constituent spins, couple them to the channel
// spin s, attach the partial wave Y_{l ml}, and couple (l,s) -> j.  The
// kinematic square-root factor
//     sqrt( omega_M(P)/M * omega1(k) omega2(k) / (omega1(p1) omega2(p2)) )
// makes the map unitary with respect to the d^3p measures; the phase-space
// identity d^3p1 d^3p2 = J d^3P k^2 dk dkhat with
//     J = omega1(p1) omega2(p2) M / (omega1(k) omega2(k) omega_M(P))
// is exercised directly by the orthonormality check.

#include <complex>
#include <vector>

#include "piqm/irreps.hpp"
#include "piqm/kinematics.hpp"

namespace piqm {

// Condon-Shortley <j1 m1 j2 m2 | j m>.  Zero when the triangle rule or
// projection constraint fails; throws std::invalid_argument when any 2j or
// j-m is not an integer.
double su2_cg(double j1, double m1, double j2, double m2, double j, double m);

// Complex spherical harmonic with the Condon-Shortley phase.
complexd sph_harmonic(int l, int ml, const Vector3d& dir);

// Spatial part of B_c^{-1}(P) p1 with P = p1 + p2.  Both arguments must be
// positive-energy timelike.
Vector3d relative_momentum(const FourVector& p1, const FourVector& p2);

// Phase-space Jacobian d^3p1 d^3p2 / (d^3P d^3k) at the given configuration.
double pair_jacobian(double m1, double m2, double k, double p1, double p2, double P);

struct SingleParticle {
  double m = 0.0;
  double j = 0.0;
  Vector3d p = Vector3d::Zero();
  double mu = 0.0;
};

struct CoupledChannel {
  int l = 0;
  double s = 0.0;
  double j = 0.0;
  double mu = 0.0;
};

struct CoupledLabel {
  CoupledChannel chan;
  Vector3d P = Vector3d::Zero();  // total three-momentum
};

// Coefficient density <p1 mu1; p2 mu2 | P; (k l s) j mu>, with the overall
// momentum and invariant-mass deltas structural.  Requires P = p1 + p2 at the
// evaluation point; kinematically forbidden labels give 0.
complexd poincare_cg(const SingleParticle& s1, const SingleParticle& s2,
                     const CoupledLabel& coupled);

// Numerically integrates CG^dagger CG over the relative direction with an
// n_cos x n_phi angular quadrature and returns max |G - 1| over the channel
// set at fixed (k, P).
double cg_orthonormality_check(double m1, double j1, double m2, double j2, double k,
                               const Vector3d& P, const std::vector<CoupledChannel>& channels,
                               int n_cos = 48, int n_phi = 48);

// Max deviation of the tensor-product/direct-integral intertwining relation
// for one group element, evaluated pointwise at relative directions drawn
// from the angular quadrature.
double cg_intertwining_deviation(double m1, double j1, double m2, double j2,
                                 const CoupledChannel& chan, const LorentzTransform& lam,
                                 const FourVector& a, double k, const Vector3d& P,
                                 int n_cos = 12, int n_phi = 8);

}  // namespace piqm

#endif
