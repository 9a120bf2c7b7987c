#ifndef PIQM_IRREPS_HPP
#define PIQM_IRREPS_HPP

// Single-particle irreducible bases in instant, point and front form, their
// Poincare group Wigner functions, basis changes, and the kinematic-subgroup
// classification.
//
// Wigner functions are point maps times a factor, never sampled deltas: a
// group element sends the basis point `source` to `target` with a complex
// weight (square-root Jacobian times translation phase) and a spin matrix.
//
// Form coordinates (3 components):
//   instant: p = (px, py, pz)
//   point:   v = spatial part of the four velocity, v0 = sqrt(1+v.v) implied
//   front:   (p+, px, py) with p+ > 0
//
// The point-form kinematic set is taken as the Lorentz subgroup (a = 0);
// translations are not part of it here.

#include <complex>
#include <utility>
#include <vector>

#include "piqm/kinematics.hpp"

namespace piqm {

enum class BasisForm { instant, point, front };

struct WignerFunctionValue {
  Eigen::Vector3d target;        // image coordinates in the form's variables
  complexd weight;               // sqrt-Jacobian factor times e^{i p.a}
  Eigen::MatrixXcd spin_matrix;  // D^j of the form's Wigner rotation
};

// Decode form coordinates into the on-shell four-momentum (and back).
FourVector coords_to_momentum(BasisForm form, double m, const Eigen::Vector3d& coords);
Eigen::Vector3d momentum_to_coords(BasisForm form, double m, const FourVector& p);

WignerFunctionValue wigner_function(BasisForm form, double m, double j,
                                    const LorentzTransform& lam, const FourVector& a,
                                    const Eigen::Vector3d& source);

struct BasisChange {
  Eigen::Vector3d target;
  // coefficient over target projections mu', ordered mu' = j ... -j:
  // |from, source, mu> = sum_{mu'} coeff[mu'] |to, target, mu'>
  Eigen::VectorXcd coeff;
};

BasisChange basis_change(BasisForm from, BasisForm to, double m, double j,
                         const Eigen::Vector3d& source, double mu);

// True iff the wigner_function values agree for both masses at every sample
// to the tolerance, which happens exactly when (lam, a) lies in the form's
// kinematic subgroup.
bool kinematic_subgroup_check(BasisForm form, const LorentzTransform& lam,
                              const FourVector& a, std::pair<double, double> masses,
                              const std::vector<Eigen::Vector3d>& samples,
                              double j = 0.5, double tol = 1e-10);

struct GroupElement {
  LorentzTransform lam;
  FourVector a;
};

// Seeded samples from (inside=true) or safely outside (inside=false) the
// form's kinematic subgroup; scale sets the translation magnitude ~ 1/scale.
GroupElement sample_group_element(BasisForm form, bool inside, SplitMix64& rng,
                                  double scale = 1.0);

// Generic seeded proper orthochronous transform (boost x rotation) and
// translation, for cocycle and representation-property sweeps.
LorentzTransform sample_lorentz(SplitMix64& rng, double max_rapidity = 1.5);

}  // namespace piqm

#endif
