#ifndef PIQM_TWOBODY_HPP
#define PIQM_TWOBODY_HPP

// Bakamjian-Thomas two-body dynamics: partial-wave interactions, the mass
// eigenvalue problem, the square-root embedding of a nonrelativistic
// potential, bound states and phase shifts.
//
// Conventions:
//   * reduced kernels <k'|v|k> carry the measure int k^2 dk and units MeV^-2;
//   * the partial-wave projection is v_l(k',k) = (2/pi) int r^2 dr
//     j_l(k'r) V(r) j_l(kr), which makes h = k^2/2mu + v the standard
//     center-of-mass Schroedinger operator;
//   * K-matrix normalization: tan(delta) = -pi rho(k) K(k,k) with the free
//     spectral density rho of whichever mass/energy operator is used.

#include <functional>
#include <vector>

#include "piqm/irreps.hpp"
#include "piqm/numerics.hpp"

namespace piqm {

struct PwChannel {
  int l = 0;
  double s = 0.0;
};

struct PartialWaveKernel {
  double j = 0.0;
  std::vector<PwChannel> channels{{0, 0.0}};
  QuadratureGrid grid;
  Eigen::MatrixXd values;  // v(k_i, k_j), MeV^-2
  std::function<double(double, double)> eval;  // analytic evaluator, exact off grid

  double hermiticity_defect() const { return piqm::hermiticity_defect(values); }
};

// Yukawa superposition V(r) = (lambda_r e^{-mu_r r} - lambda_a e^{-mu_a r})/r
// with dimensionless strengths and ranges in MeV.
struct MtParams {
  double lambda_r = 0.0;
  double lambda_a = 0.0;
  double mu_r = 1.0;
  double mu_a = 1.0;
};

// s-wave partial-wave projection of the Malfliet-Tjon form:
//   v0(k',k) = [ lr ln(((k+k')^2+mur^2)/((k-k')^2+mur^2))
//              - la ln(((k+k')^2+mua^2)/((k-k')^2+mua^2)) ] / (2 pi k k')
PartialWaveKernel malfliet_tjon_kernel(const MtParams& params, const QuadratureGrid& grid);

// Symmetrized Nystrom discretization of h = k^2/(2 mu) + v with its
// eigendecomposition, the workhorse behind every spectral-function embedding.
struct PairHamiltonian {
  QuadratureGrid grid;
  double mu = 0.0;
  Eigen::VectorXd s;      // k_i sqrt(w_i)
  Eigen::VectorXd e0;     // k_i^2 / 2mu
  Eigen::VectorXd evals;  // ascending
  Eigen::MatrixXd evecs;  // orthonormal columns in the symmetrized basis

  // kernel of f(h) - f(h0) on the grid (symmetric, MeV^-2 against k^2 dk)
  Eigen::MatrixXd mapped_kernel(const std::function<double(double)>& f) const;

  // off-grid kernel row V(x, k_l) by the Nystrom divided-difference
  // extension; needs the analytic evaluator of the underlying interaction
  Eigen::VectorXd mapped_kernel_row(const PartialWaveKernel& v,
                                    const std::function<double(double)>& f,
                                    const std::function<double(double)>& fp, double x) const;
};

PairHamiltonian build_pair_hamiltonian(const PartialWaveKernel& v, double mu);

struct MassOperator {
  double m1 = 0.0, m2 = 0.0;
  QuadratureGrid grid;
  Eigen::VectorXd kinetic;      // sqrt(m1^2+k^2) + sqrt(m2^2+k^2) on nodes
  Eigen::MatrixXd interaction;  // kernel values, MeV^-2

  // symmetrized matrix kinetic + S V S
  Eigen::MatrixXd matrix() const;
  double hermiticity_defect() const;
};

// M12 = sqrt(k^2 + 2 mu v + m1^2) + sqrt(k^2 + 2 mu v + m2^2) by spectral
// calculus on h = k^2/2mu + v.  Throws std::runtime_error when some
// eigenvalue drives a square-root argument negative.
MassOperator coester_embed(const PartialWaveKernel& v_nr, double m1, double m2);

struct TwoBodySolution {
  std::vector<double> bound_masses;                  // < m1+m2, ascending (MeV)
  std::vector<Eigen::VectorXd> bound_wavefunctions;  // phi(k_i), sum w k^2 phi^2 = 1
};

TwoBodySolution solve_bound_states(const MassOperator& op);

// Kernel of sqrt(2 mu h + c) - sqrt(2 mu h0 + c) with h = k^2/2mu + v, built
// from the resolvent integral
//   sqrt(B) - sqrt(B0) = (2/pi) int_0^inf t^2 (B+t^2)^-1 (2 mu v) (B0+t^2)^-1 dt,
// whose first Born term integrates analytically to 2 mu v(p,q)/(sqrt(d_p)+
// sqrt(d_q)).  Unlike spectral calculus on the grid, every piece is a smooth
// localized Nystrom object, so values converge geometrically and extend
// exactly off grid.  This is the engine behind the square-root embeddings;
// the 2+1 spectator embedding is the same object with c = m^2 + q^2/4.
class SqrtShiftKernel {
 public:
  SqrtShiftKernel(const PartialWaveKernel& v, double mu, double c, int nt = 64);

  const Eigen::MatrixXd& values() const { return vals_; }
  const QuadratureGrid& grid() const { return grid_; }

  // exact evaluation at arbitrary momenta (Nystrom extension)
  double at(double p, double q) const;

  // full kernel row V(x, k_j) over the grid nodes in one pass
  void row_at(double x, Eigen::VectorXd& row) const;

 private:
  double dshift(double k) const { return k * k + c_; }  // 2 mu e(k) + c

  QuadratureGrid grid_;
  double mu_ = 0.0, c_ = 0.0;
  std::function<double(double, double)> veval_;
  std::vector<double> tn_, tw_;                        // resolvent quadrature
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;  // (Bop + t^2) factors
  std::vector<Eigen::MatrixXd> xi_;                    // (Bop + t^2)^-1 v
  Eigen::VectorXd meas_;                               // w_i k_i^2
  Eigen::MatrixXd vk_;                                 // v(k_i,k_j)
  Eigen::MatrixXd vals_;
};

enum class PhaseFramework { nonrelativistic, relativistic };

// Elastic s-wave phase shifts at the requested on-shell momenta.
//   nonrelativistic: K-matrix equation for h = k^2/2mu + v.
//   relativistic:    direct solve with the mass operator M(v), an independent
//                    code path whose agreement with the nonrelativistic
//                    result realizes the invariance-principle identity.
std::vector<double> solve_phase_shifts(const PartialWaveKernel& v, PhaseFramework fw,
                                       const std::vector<double>& k_on, double m1, double m2);

// Generic spectral-function K-matrix solver: phase shift of the operator
// f0(h) given the interaction kernel (exact on the grid, interpolated off
// grid when no evaluator is supplied).  Used by both frameworks above and by
// the 2+1 embeddings.
double kmatrix_phase_shift(const QuadratureGrid& grid, const Eigen::MatrixXd& kernel,
                           const std::function<double(double, double)>& eval, double mu,
                           const std::function<double(double)>& f0,
                           const std::function<double(double)>& f0prime, double k_on);

// Wigner-function evaluator of the dynamical irrep with the bound-state mass
// replacing the kinematic mass.
struct DynamicalIrrep {
  double mass = 0.0;  // bound-state eigenvalue lambda
  double j = 0.0;
  BasisForm form = BasisForm::instant;

  WignerFunctionValue operator()(const LorentzTransform& lam, const FourVector& a,
                                 const Eigen::Vector3d& coords) const {
    return wigner_function(form, mass, j, lam, a, coords);
  }
};

DynamicalIrrep build_dynamical_irrep(const TwoBodySolution& sol, BasisForm form,
                                     double j = 0.0, int level = 0);

}  // namespace piqm

#endif
