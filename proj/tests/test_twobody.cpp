#include <cmath>

#include "doctest.h"
#include "piqm/twobody.hpp"

using namespace piqm;

namespace {

// default model: classic Malfliet-Tjon V translated to MeV units
// (strengths 1438.720 and 570.316 MeV fm, ranges 3.11 and 1.55 fm^-1)
const MtParams kMtV{7.291, 2.8904, 613.69, 305.86};
const double kNucleonMass = 938.92;

QuadratureGrid default_grid(int n = 64) { return make_grid(n, 250.0, GridMapping::rational); }

// coordinate-space Fourier-Bessel transform of the Yukawa pair, the
// independent oracle for the momentum-space kernel
double mt_oracle(const MtParams& p, double kp, double k) {
  const int nr = 1200;
  std::vector<double> x, w;
  gauss_legendre(nr, x, w);
  const double rmax = 60.0 / std::min(p.mu_r, p.mu_a);
  double sum = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = 0.5 * rmax * (x[i] + 1.0);
    const double wr = 0.5 * rmax * w[i];
    const double vr = (p.lambda_r * std::exp(-p.mu_r * r) - p.lambda_a * std::exp(-p.mu_a * r)) / r;
    const double j0p = std::sin(kp * r) / (kp * r);
    const double j0 = std::sin(k * r) / (k * r);
    sum += wr * r * r * j0p * vr * j0;
  }
  return 2.0 / M_PI * sum;
}

}  // namespace

TEST_CASE("malfliet-tjon kernel basics") {
  const auto grid = default_grid(24);

  // zero strengths give the zero kernel
  const auto v0 = malfliet_tjon_kernel({0.0, 0.0, 613.69, 305.86}, grid);
  CHECK(v0.values.cwiseAbs().maxCoeff() == 0.0);

  // diagonal: ln((4k^2+mu^2)/mu^2) finite and positive for positive strength
  const auto vr = malfliet_tjon_kernel({1.0, 0.0, 613.69, 305.86}, grid);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(std::isfinite(vr.values(i, i)));
    CHECK(vr.values(i, i) > 0.0);
  }

  CHECK_THROWS_AS(malfliet_tjon_kernel({1.0, 1.0, -1.0, 300.0}, grid), std::invalid_argument);

  // hermitian by construction
  const auto v = malfliet_tjon_kernel(kMtV, grid);
  CHECK(v.hermiticity_defect() < 1e-15);
}

TEST_CASE("malfliet-tjon kernel matches the coordinate-space oracle") {
  const auto grid = default_grid(16);
  const auto v = malfliet_tjon_kernel(kMtV, grid);
  SplitMix64 rng(51);
  for (int t = 0; t < 20; ++t) {
    const double kp = rng.uniform(5.0, 800.0);
    const double k = rng.uniform(5.0, 800.0);
    const double direct = v.eval(kp, k);
    const double oracle = mt_oracle(kMtV, kp, k);
    CHECK(std::abs(direct - oracle) < 1e-9 * std::max(1e-8, std::abs(oracle)));
  }
  // small-momentum limit of the log expression stays finite and consistent
  const double tiny = v.eval(1e-8, 1e-8);
  CHECK(std::isfinite(tiny));
  const double expect0 = 2.0 / M_PI * (kMtV.lambda_r / (kMtV.mu_r * kMtV.mu_r) -
                                       kMtV.lambda_a / (kMtV.mu_a * kMtV.mu_a));
  CHECK(tiny == doctest::Approx(expect0).epsilon(1e-6));
}

TEST_CASE("coester embedding") {
  const auto grid = default_grid(48);
  const auto v = malfliet_tjon_kernel(kMtV, grid);
  const double m = kNucleonMass;

  // free case: v = 0 gives the diagonal free mass operator
  {
    const auto vz = malfliet_tjon_kernel({0.0, 0.0, 1.0, 1.0}, grid);
    const auto op = coester_embed(vz, m, m);
    CHECK(op.interaction.cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < grid.size(); ++i)
      CHECK(op.kinetic[i] == doctest::Approx(2.0 * omega(m, grid.nodes[i])).epsilon(1e-14));
  }

  const auto op = coester_embed(v, m, m);
  CHECK(op.hermiticity_defect() < 1e-12 * op.matrix().cwiseAbs().maxCoeff());

  // spectral map: eigenvalues of M equal sqrt(2 mu e + m1^2)+sqrt(2 mu e + m2^2)
  const double mu = 0.5 * m;
  const auto h = build_pair_hamiltonian(v, mu);
  const auto msol = symmetric_eigensolve({op.matrix(), true, "", ""});
  for (int i = 0; i < grid.size(); ++i) {
    const double mapped = std::sqrt(2.0 * mu * h.evals[i] + m * m) +
                          std::sqrt(2.0 * mu * h.evals[i] + m * m);
    CHECK(std::abs(msol.values[i] - mapped) < 1e-10 * mapped);
  }

  // eigenvectors of M and h identical up to phase
  for (int i : {0, 5, 20}) {
    const double overlap = std::abs(msol.vectors.col(i).dot(h.evecs.col(i)));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-10));
  }

  // unequal masses exercise the general map
  const auto op2 = coester_embed(v, m, 1.5 * m);
  const double mu2 = m * 1.5 * m / (2.5 * m);
  const auto h2 = build_pair_hamiltonian(v, mu2);
  const auto msol2 = symmetric_eigensolve({op2.matrix(), true, "", ""});
  for (int i = 0; i < grid.size(); ++i) {
    const double mapped = std::sqrt(2.0 * mu2 * h2.evals[i] + m * m) +
                          std::sqrt(2.0 * mu2 * h2.evals[i] + 2.25 * m * m);
    CHECK(std::abs(msol2.values[i] - mapped) < 1e-10 * mapped);
  }

  // a potential deep enough to push 2 mu e + m^2 negative is rejected
  {
    PartialWaveKernel deep;
    deep.grid = make_grid(16, 1.0, GridMapping::rational);
    deep.values = Eigen::MatrixXd::Constant(16, 16, -50.0);
    deep.eval = [](double, double) { return -50.0; };
    CHECK_THROWS_AS(coester_embed(deep, 1.0, 1.0), std::runtime_error);
  }
}

TEST_CASE("bound states") {
  const double m = kNucleonMass;

  // free operator has no bound states
  {
    const auto grid = default_grid(32);
    const auto vz = malfliet_tjon_kernel({0.0, 0.0, 1.0, 1.0}, grid);
    const auto sol = solve_bound_states(coester_embed(vz, m, m));
    CHECK(sol.bound_masses.empty());
  }

  // the default model binds exactly one state below threshold
  const auto grid = default_grid(48);
  const auto v = malfliet_tjon_kernel(kMtV, grid);
  const auto sol = solve_bound_states(coester_embed(v, m, m));
  REQUIRE(sol.bound_masses.size() == 1);
  CHECK(sol.bound_masses[0] < 2.0 * m);

  // normalization sum w k^2 phi^2 = 1
  double norm = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    norm += grid.weights[i] * grid.nodes[i] * grid.nodes[i] *
            sol.bound_wavefunctions[0][i] * sol.bound_wavefunctions[0][i];
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));

  // eigenresidual of the bound state
  const auto op = coester_embed(v, m, m);
  const Eigen::MatrixXd mm = op.matrix();
  Eigen::VectorXd psi(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    psi[i] = sol.bound_wavefunctions[0][i] * grid.nodes[i] * std::sqrt(grid.weights[i]);
  CHECK((mm * psi - sol.bound_masses[0] * psi).norm() < 1e-9 * sol.bound_masses[0]);

  // the binding matches the spectral map of the h ground state
  const auto h = build_pair_hamiltonian(v, 0.5 * m);
  const double mapped = 2.0 * std::sqrt(m * (m + h.evals[0]));
  CHECK(sol.bound_masses[0] == doctest::Approx(mapped).epsilon(1e-12));

  // grid doubling moves the bound mass by less than 1 keV
  const auto v2 = malfliet_tjon_kernel(kMtV, default_grid(96));
  const auto sol2 = solve_bound_states(coester_embed(v2, m, m));
  REQUIRE(sol2.bound_masses.size() == 1);
  CHECK(std::abs(sol2.bound_masses[0] - sol.bound_masses[0]) < 1e-3);

  // relativistic and nonrelativistic wave functions are identical
  Eigen::VectorXd phi_nr(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    phi_nr[i] = h.evecs(i, 0) / (grid.nodes[i] * std::sqrt(grid.weights[i]));
  double overlap = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    overlap += grid.weights[i] * grid.nodes[i] * grid.nodes[i] * phi_nr[i] *
               sol.bound_wavefunctions[0][i];
  CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("phase shifts") {
  const double m = kNucleonMass;
  const auto grid = default_grid(96);
  const auto v = malfliet_tjon_kernel(kMtV, grid);

  // v = 0 gives vanishing phase shifts
  {
    const auto vz = malfliet_tjon_kernel({0.0, 0.0, 1.0, 1.0}, grid);
    for (double d : solve_phase_shifts(vz, PhaseFramework::nonrelativistic, {50.0, 300.0}, m, m))
      CHECK(std::abs(d) < 1e-14);
    for (double d : solve_phase_shifts(vz, PhaseFramework::relativistic, {50.0, 300.0}, m, m))
      CHECK(std::abs(d) < 1e-12);
  }

  // invariance principle: the two independent code paths agree
  std::vector<double> kon;
  for (int i = 0; i < 10; ++i) kon.push_back(10.0 + i * (490.0 / 9.0));
  const auto dnr = solve_phase_shifts(v, PhaseFramework::nonrelativistic, kon, m, m);
  const auto drel = solve_phase_shifts(v, PhaseFramework::relativistic, kon, m, m);
  for (std::size_t i = 0; i < kon.size(); ++i) {
    CHECK(std::abs(drel[i] - dnr[i]) < 1e-8);
  }

  // attraction too weak to bind gives positive low-momentum phase shifts,
  // with the Born term as the sign oracle
  const auto va = malfliet_tjon_kernel({0.0, 0.2, 613.69, 305.86}, grid);
  CHECK(build_pair_hamiltonian(va, 0.5 * m).evals[0] > 0.0);  // no bound state
  const auto datt = solve_phase_shifts(va, PhaseFramework::nonrelativistic, {20.0, 40.0}, m, m);
  for (double d : datt) CHECK(d > 0.0);
  const double born = -M_PI * (0.5 * m) * 20.0 * va.eval(20.0, 20.0);
  CHECK(born > 0.0);
  CHECK(datt[0] == doctest::Approx(born).epsilon(0.2));

  // on-shell point may sit on a grid node without a pole being hit
  const double dnode =
      kmatrix_phase_shift(v.grid, v.values, v.eval, 0.5 * m, [](double e) { return e; },
                          [](double) { return 1.0; }, v.grid.nodes[40]);
  CHECK(std::isfinite(dnode));
}

TEST_CASE("dynamical irrep evaluator") {
  const double m = kNucleonMass;
  const auto grid = default_grid(48);
  const auto v = malfliet_tjon_kernel(kMtV, grid);
  const auto sol = solve_bound_states(coester_embed(v, m, m));
  REQUIRE(!sol.bound_masses.empty());

  const auto irrep = build_dynamical_irrep(sol, BasisForm::instant);
  CHECK(irrep.mass == sol.bound_masses[0]);
  CHECK_THROWS_AS(build_dynamical_irrep(sol, BasisForm::instant, 0.0, 3), std::invalid_argument);

  const Eigen::Vector3d coords(120.0, -40.0, 200.0);

  // identity element reproduces the identity output
  const auto vid = irrep(LorentzTransform::identity(), FourVector(), coords);
  CHECK(std::abs(vid.weight - 1.0) < 1e-13);

  // rotations are kinematic: output independent of the mass eigenvalue
  const auto rot = LorentzTransform::rotation_axis_angle(Vector3d(0.2, 1.0, 0.5), 1.1);
  const auto a = irrep(rot, FourVector(), coords);
  const auto b = wigner_function(BasisForm::instant, 2.0 * m, 0.0, rot, FourVector(), coords);
  CHECK(std::abs(a.weight - b.weight) < 1e-12);
  CHECK((a.target - b.target).norm() < 1e-10);

  // a z-boost distinguishes the dynamical mass from the free threshold
  const auto zb = boost_canonical(1.0, Vector3d(0, 0, std::sinh(0.6)));
  const auto c = irrep(zb, FourVector(), coords);
  const auto d = wigner_function(BasisForm::instant, 2.0 * m, 0.0, zb, FourVector(), coords);
  CHECK(std::abs(c.weight - d.weight) > 1e-6);
  CHECK((c.target - d.target).norm() > 1e-3);
}
