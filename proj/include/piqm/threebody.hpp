#ifndef PIQM_THREEBODY_HPP
#define PIQM_THREEBODY_HPP

// Three-boson Faddeev machinery for equal-mass spinless particles with an
// s-wave pair interaction: the two embeddings of the pair force, 2+1 mass
// operators, the permutation (Racah) geometry, the half-shell kernel
// relation, off-shell extension by the first resolvent identity, kernel
// assembly and the bound-state search, plus dense direct-diagonalization
// oracles on a (k,q,x) product grid.
//
// All operators act in the three-body rest frame.  The free mass is
//   W0(k,q) = sqrt(4(m^2+k^2)+q^2) + sqrt(m^2+q^2),
// and the embedded pair interaction at spectator momentum q is
//   v_q = sqrt(M12^2+q^2) - sqrt(M12(0)^2+q^2)
//       = 2[sqrt(2 mu h + c_q) - sqrt(2 mu h0 + c_q)],   c_q = m^2 + q^2/4.
//
// In this spinless s-wave rest-frame sector the tensor-product and
// Bakamjian-Thomas embeddings produce identical matrices; what distinguishes
// them is the representation they are associated with, and hence the route
// by which the reduced on-shell S elements are computed.  That is what
// onshell_equivalence_check exercises.

#include <utility>
#include <vector>

#include "piqm/twobody.hpp"

namespace piqm {

struct JacobiGrid {
  QuadratureGrid k_grid;  // pair relative momentum
  QuadratureGrid q_grid;  // spectator momentum
};

enum class EmbeddingKind { tensor_product, bakamjian_thomas };

// 2+1 mass operator, block diagonal in the spectator momentum.
struct EmbeddedMassOperator {
  EmbeddingKind kind = EmbeddingKind::bakamjian_thomas;
  double m = 0.0;   // pair constituent mass
  double m3 = 0.0;  // spectator mass
  JacobiGrid grids;
  std::vector<Eigen::MatrixXd> blocks;  // symmetrized k-space matrix per q node

  Eigen::MatrixXd full_matrix() const;  // block-diagonal assembly
  double hermiticity_defect() const;
};

EmbeddedMassOperator embed_tensor(const PartialWaveKernel& v, double m, double m3,
                                  const JacobiGrid& grids);
EmbeddedMassOperator embed_bt(const PartialWaveKernel& v, double m, double m3,
                              const JacobiGrid& grids);

// Max |Delta S| between the on-shell reduced S elements computed through the
// tensor-product route (pair mass operator alone) and the Bakamjian-Thomas
// route (k-space scattering inside sqrt(M12^2+q^2) at fixed spectator q).
double onshell_equivalence_check(const PartialWaveKernel& v, double m, double m3,
                                 const std::vector<double>& k_on, double q_spectator);

// Relativistic (or nonrelativistic) permutation geometry connecting the
// (12)(3) and (23)(1) coupling orders at spectator momenta (q, q') with
// cosine x between them:
//   pi1 = pair-(12) relative momentum, pi2 = pair-(23) relative momentum,
//   jac = 1/sqrt(J12 J23), the recoupling weight (1 in the nonrelativistic
//   map), fixed by unitarity through the pair phase-space Jacobians.
struct PermutationGeometry {
  double pi1 = 0.0;
  double pi2 = 0.0;
  double jac = 1.0;
};

PermutationGeometry permutation_geometry(double q, double qp, double x, double m,
                                         bool relativistic);

// The recoupling weight alone (relativistic map).
double permutation_coefficient(double q, double qp, double x, double m);

// Bracketed factor of the half-shell relation: the embedded interaction
// applied to a pair eigenstate equals this factor times the nonrelativistic
// half-shell t matrix.  k_on is the on-shell pair momentum, k_row the
// off-shell row momentum.
double halfshell_factor(double k_on, double k_row, double q, double m1, double m2);

// factor times t_nr, with z_c validated against the 2+1 shell value
double halfshell_kernel(double t_nr, double k_on, double k_row, double q, double z_c,
                        double m1, double m2, double m3);

// Max relative deviation of the half-shell identity
//   <k'| V_q |psi_e> = F(k_c, k', q) <k'| v_nr |psi_e>
// checked against the Bakamjian-Thomas embedded matrices built by spectral
// calculus, at n_samples random (eigenstate, row, q) points.
double halfshell_identity_deviation(const PartialWaveKernel& v, double m, int n_samples,
                                    SplitMix64& rng);

// Pair t matrix at fixed spectator momentum: t = v_q + v_q (z - W0)^-1 t on
// the k grid.  w0 holds W0(k_i, q); z must lie below every w0 entry.
Eigen::MatrixXd embedded_tmatrix(const Eigen::MatrixXd& vq, const Eigen::VectorXd& w0,
                                 const QuadratureGrid& k_grid, double z);

// First-resolvent-identity extension T(z') from T(z_c), solved as a linear
// system.  Throws std::runtime_error with a conditioning report when the
// system is singular.
Eigen::MatrixXd offshell_extend(const Eigen::MatrixXd& t_zc, const Eigen::VectorXd& w0,
                                const QuadratureGrid& k_grid, double z_prime, double z_c);

enum class TmatrixStrategy { direct, resolvent_extend };

// Construction of the embedded pair kernels: the resolvent integral is the
// robust production choice; spectral calculus on the pair eigenbasis matches
// the direct-diagonalization oracle construction exactly and is used when
// comparing against it.
enum class PairKernelSource { resolvent, spectral };

struct FaddeevOptions {
  int n_angle = 20;                 // Gauss-Legendre points for the x integral
  bool relativistic = true;
  TmatrixStrategy strategy = TmatrixStrategy::resolvent_extend;
  PairKernelSource kernel_source = PairKernelSource::resolvent;
  int scan_points = 20;             // coarse z scan of the search bracket
  double z_tol = 1e-8;              // MeV, bound-state mass tolerance
};

// Faddeev kernel K(z) = (z - M0)^-1 T(z) P on the (k,q) product grid,
// row/column index ik + nk*iq.  The eigenvalue-1 condition of this kernel
// locates the three-body bound state.
struct FaddeevKernel {
  double z = 0.0;
  JacobiGrid grids;
  Eigen::MatrixXd matrix;
};

FaddeevKernel assemble_faddeev_kernel(const PartialWaveKernel& v, double m, double z,
                                      const JacobiGrid& grids, const FaddeevOptions& opt);

struct TrimerSolution {
  bool bound = false;
  double mass = 0.0;        // M3 (MeV) when bound
  double pair_mass = 0.0;   // two-body bound mass (threshold bookkeeping)
  Eigen::MatrixXd psi;      // Faddeev component psi(k_i, q_j), unit norm
  std::vector<std::pair<double, double>> eta_history;  // (z, eta) over the search
};

// Bound-state search: dominant eigenvalue eta(z) of K(z) scanned over
// [2m, m + pair mass], then bisection/secant refinement of eta(z) = 1.
TrimerSolution solve_trimer(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                            const FaddeevOptions& opt);

// Nonrelativistic companion with identical grids and truncation.
TrimerSolution solve_trimer_nonrel(const PartialWaveKernel& v, double m,
                                   const JacobiGrid& grids, FaddeevOptions opt = {});

// Dense (k,q,x) realization of M = M_(12)(3) + M_(23)(1) + M_(31)(2) - 2 M0
// with s-wave projected pair interactions, acting on wavefunction samples
// (the k^2 dk q^2 dq dx/2 measure is folded into the rows).  Intended for
// capped grids, where wavefunctions are treated as zero beyond the cutoff.
Eigen::MatrixXd trimer_oracle_matrix(const PartialWaveKernel& v, double m,
                                     const JacobiGrid& grids, int nx, bool relativistic);

// Lowest eigenvalue of the oracle operator.  The optional output receives the
// symmetrization residual ||P psi - psi|| / ||psi|| of the ground state under
// a cyclic relabeling.
double trimer_oracle_mass(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                          int nx, bool relativistic, double* sym_residual = nullptr);

}  // namespace piqm

#endif
