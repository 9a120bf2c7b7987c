#include "piqm/threebody.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "piqm/clebsch.hpp"

namespace piqm {

namespace {

// free 2+1 mass in the rest frame
double w0_of(double k, double q, double m, double m3, bool relativistic) {
  if (relativistic)
    return 2.0 * std::sqrt(m * m + k * k + 0.25 * q * q) + std::sqrt(m3 * m3 + q * q);
  // equal-mass pair plus spectator Jacobi kinetic energies on the rest masses
  return 2.0 * m + m3 + k * k / m + q * q * (0.25 / m + 0.5 / m3);
}

// the equal-mass spectator case used by the solvers
double w0_boson(double k, double q, double m, bool relativistic) {
  if (relativistic)
    return 2.0 * std::sqrt(m * m + k * k + 0.25 * q * q) + std::sqrt(m * m + q * q);
  return 3.0 * m + k * k / m + 0.75 * q * q / m;
}

// pair mass map inside sqrt(M12^2 + q^2) for equal constituent masses
double fq_map(double e, double m, double q) {
  return 2.0 * std::sqrt(e * m + m * m + 0.25 * q * q);  // 2 mu = m
}

double fq_map_deriv(double e, double m, double q) {
  return m / std::sqrt(e * m + m * m + 0.25 * q * q);
}

// embedded interaction kernel at spectator momentum q
Eigen::MatrixXd vq_kernel(const PairHamiltonian& h, const PartialWaveKernel& v, double m,
                          double q, bool relativistic) {
  if (!relativistic) return v.values;
  return h.mapped_kernel([m, q](double e) { return fq_map(e, m, q); });
}

Eigen::MatrixXd embed_blocks_matrix(const PartialWaveKernel& v, double m, double m3,
                                    const JacobiGrid& grids, EmbeddingKind kind,
                                    std::vector<Eigen::MatrixXd>& blocks) {
  const PairHamiltonian h = build_pair_hamiltonian(v, 0.5 * m);
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  blocks.clear();
  blocks.reserve(nq);
  for (int iq = 0; iq < nq; ++iq) {
    const double q = grids.q_grid.nodes[iq];
    const Eigen::MatrixXd vq = vq_kernel(h, v, m, q, true);
    Eigen::MatrixXd blk(nk, nk);
    for (int i = 0; i < nk; ++i) {
      const double si = grids.k_grid.nodes[i] * std::sqrt(grids.k_grid.weights[i]);
      for (int j = 0; j < nk; ++j) {
        const double sj = grids.k_grid.nodes[j] * std::sqrt(grids.k_grid.weights[j]);
        blk(i, j) = si * vq(i, j) * sj;
      }
      blk(i, i) += w0_of(grids.k_grid.nodes[i], q, m, m3, true);
    }
    blocks.push_back(blk);
  }
  (void)kind;
  return Eigen::MatrixXd();
}

}  // namespace

Eigen::MatrixXd EmbeddedMassOperator::full_matrix() const {
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(nk * nq, nk * nq);
  for (int iq = 0; iq < nq; ++iq)
    full.block(iq * nk, iq * nk, nk, nk) = blocks[iq];
  return full;
}

double EmbeddedMassOperator::hermiticity_defect() const {
  double d = 0.0;
  for (const auto& b : blocks) d = std::max(d, piqm::hermiticity_defect(b));
  return d;
}

EmbeddedMassOperator embed_tensor(const PartialWaveKernel& v, double m, double m3,
                                  const JacobiGrid& grids) {
  EmbeddedMassOperator op;
  op.kind = EmbeddingKind::tensor_product;
  op.m = m;
  op.m3 = m3;
  op.grids = grids;
  embed_blocks_matrix(v, m, m3, grids, op.kind, op.blocks);
  return op;
}

EmbeddedMassOperator embed_bt(const PartialWaveKernel& v, double m, double m3,
                              const JacobiGrid& grids) {
  EmbeddedMassOperator op;
  op.kind = EmbeddingKind::bakamjian_thomas;
  op.m = m;
  op.m3 = m3;
  op.grids = grids;
  embed_blocks_matrix(v, m, m3, grids, op.kind, op.blocks);
  return op;
}

double onshell_equivalence_check(const PartialWaveKernel& v, double m, double m3,
                                 const std::vector<double>& k_on, double q_spectator) {
  const double mu = 0.5 * m;
  const double q = q_spectator;
  const double spectator_energy = std::sqrt(m3 * m3 + q * q);

  // tensor-product route: the reduced element is the pair's own S
  const SqrtShiftKernel sa(v, mu, m * m);
  auto fa = [m](double e) { return 2.0 * std::sqrt(e * m + m * m); };
  auto fap = [m](double e) { return m / std::sqrt(e * m + m * m); };
  Eigen::MatrixXd va2 = 2.0 * sa.values();
  auto evala = [&sa](double p, double kq) { return 2.0 * sa.at(p, kq); };

  // Bakamjian-Thomas route: k-space scattering inside sqrt(M12^2+q^2) at
  // fixed spectator momentum; the spectator energy is a constant shift
  const double cq = m * m + 0.25 * q * q;
  const SqrtShiftKernel sb(v, mu, cq);
  auto fb = [m, q, spectator_energy](double e) { return fq_map(e, m, q) + spectator_energy; };
  auto fbp = [m, q](double e) { return fq_map_deriv(e, m, q); };
  Eigen::MatrixXd vb2 = 2.0 * sb.values();
  auto evalb = [&sb](double p, double kq) { return 2.0 * sb.at(p, kq); };

  double dev = 0.0;
  for (double k : k_on) {
    const double da = kmatrix_phase_shift(v.grid, va2, evala, mu, fa, fap, k);
    const double db = kmatrix_phase_shift(v.grid, vb2, evalb, mu, fb, fbp, k);
    const complexd seln_a = std::exp(complexd(0.0, 2.0 * da));
    const complexd seln_b = std::exp(complexd(0.0, 2.0 * db));
    dev = std::max(dev, std::abs(seln_a - seln_b));
  }
  return dev;
}

PermutationGeometry permutation_geometry(double q, double qp, double x, double m,
                                         bool relativistic) {
  if (!(m > 0.0)) throw std::invalid_argument("permutation_geometry: mass must be positive");
  if (q < 0.0 || qp < 0.0 || std::abs(x) > 1.0 + 1e-12)
    throw std::invalid_argument("permutation_geometry: bad arguments");
  x = std::clamp(x, -1.0, 1.0);

  PermutationGeometry g;
  if (!relativistic) {
    g.pi1 = std::sqrt(qp * qp + 0.25 * q * q + q * qp * x);
    g.pi2 = std::sqrt(q * q + 0.25 * qp * qp + q * qp * x);
    g.jac = 1.0;
    return g;
  }

  // rest-frame configuration: spectator-3 momentum q z^, spectator-1
  // momentum qp at angle x, p2 balances
  const Vector3d p3(0.0, 0.0, q);
  const Vector3d p1(qp * std::sqrt(1.0 - x * x), 0.0, qp * x);
  const Vector3d p2 = -p3 - p1;

  const FourVector f1 = onshell(m, p1), f2 = onshell(m, p2), f3 = onshell(m, p3);
  g.pi1 = relative_momentum(f1, f2).norm();
  g.pi2 = relative_momentum(f2, f3).norm();

  const double j12 = pair_jacobian(m, m, g.pi1, p1.norm(), p2.norm(), q);
  const double j23 = pair_jacobian(m, m, g.pi2, p2.norm(), p3.norm(), qp);
  g.jac = 1.0 / std::sqrt(j12 * j23);
  return g;
}

double permutation_coefficient(double q, double qp, double x, double m) {
  return permutation_geometry(q, qp, x, m, true).jac;
}

double halfshell_factor(double k_on, double k_row, double q, double m1, double m2) {
  const double mu = m1 * m2 / (m1 + m2);
  const double w1 = omega(m1, k_on), w2 = omega(m2, k_on);
  const double w1p = omega(m1, k_row), w2p = omega(m2, k_row);
  const double s = w1 + w2, sp = w1p + w2p;
  return 2.0 * mu / (w1 * w2 + w1p * w2p) * (s * s + sp * sp) /
         (std::sqrt(s * s + q * q) + std::sqrt(sp * sp + q * q));
}

double halfshell_kernel(double t_nr, double k_on, double k_row, double q, double z_c,
                        double m1, double m2, double m3) {
  const double shell =
      std::sqrt(std::pow(omega(m1, k_on) + omega(m2, k_on), 2) + q * q) +
      std::sqrt(m3 * m3 + q * q);
  if (std::abs(z_c - shell) > 1e-8 * shell)
    throw std::invalid_argument("halfshell_kernel: z_c is not on the 2+1 shell for (k, q)");
  return halfshell_factor(k_on, k_row, q, m1, m2) * t_nr;
}

double halfshell_identity_deviation(const PartialWaveKernel& v, double m, int n_samples,
                                    SplitMix64& rng) {
  const double mu = 0.5 * m;
  const PairHamiltonian h = build_pair_hamiltonian(v, mu);
  const int n = h.grid.size();

  // symmetrized interaction matrices
  Eigen::MatrixXd vnr_sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) vnr_sym(i, j) = h.s[i] * v.values(i, j) * h.s[j];

  double dev = 0.0;
  for (int t = 0; t < n_samples; ++t) {
    // positive-energy eigenstate, random row, random spectator momentum
    int nidx = 0;
    do {
      nidx = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
    } while (h.evals[nidx] <= 0.0);
    const double q = rng.uniform(10.0, 600.0);
    const double kc = std::sqrt(2.0 * mu * h.evals[nidx]);

    const Eigen::MatrixXd vq = h.mapped_kernel([m, q](double e) { return fq_map(e, m, q); });
    Eigen::MatrixXd vq_sym(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) vq_sym(i, j) = h.s[i] * vq(i, j) * h.s[j];

    const Eigen::VectorXd psi = h.evecs.col(nidx);
    const Eigen::VectorXd lhs = vq_sym * psi;
    const Eigen::VectorXd tcol = vnr_sym * psi;  // discrete half-shell t column
    const double scale = tcol.cwiseAbs().maxCoeff();

    for (int trial = 0; trial < 4; ++trial) {
      const int i = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      const double rhs = halfshell_factor(kc, h.grid.nodes[i], q, m, m) * tcol[i];
      const double denom = std::max({std::abs(lhs[i]), std::abs(rhs), 1e-6 * scale});
      dev = std::max(dev, std::abs(lhs[i] - rhs) / denom);
    }
  }
  return dev;
}

Eigen::MatrixXd embedded_tmatrix(const Eigen::MatrixXd& vq, const Eigen::VectorXd& w0,
                                 const QuadratureGrid& k_grid, double z) {
  const int n = k_grid.size();
  if (z >= w0.minCoeff())
    throw std::invalid_argument("embedded_tmatrix: z above the 2+1 continuum threshold");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double g0 = k_grid.weights[j] * k_grid.nodes[j] * k_grid.nodes[j] / (z - w0[j]);
      a(i, j) -= vq(i, j) * g0;
    }
  return a.partialPivLu().solve(vq);
}

Eigen::MatrixXd offshell_extend(const Eigen::MatrixXd& t_zc, const Eigen::VectorXd& w0,
                                const QuadratureGrid& k_grid, double z_prime, double z_c) {
  if (z_prime == z_c) throw std::invalid_argument("offshell_extend: z' must differ from z_c");
  const int n = k_grid.size();
  // T(z') [ I - D T(z_c) ] = T(z_c) with the diagonal divided-difference
  // resolvent weight D = (z_c - z') / ((z' - M0)(z_c - M0)) and the k^2 dk
  // measure folded in.  The sign follows from the first resolvent identity
  // and is pinned by the direct-solve oracle.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n);
  for (int l = 0; l < n; ++l) {
    const double d = (z_c - z_prime) / ((z_prime - w0[l]) * (z_c - w0[l]));
    const double meas = k_grid.weights[l] * k_grid.nodes[l] * k_grid.nodes[l];
    for (int j = 0; j < n; ++j) sys(l, j) -= d * meas * t_zc(l, j);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.transpose());
  const Eigen::MatrixXd tz = lu.solve(t_zc.transpose()).transpose();
  const double resid = (tz * sys - t_zc).cwiseAbs().maxCoeff();
  const double scale = std::max(1e-300, t_zc.cwiseAbs().maxCoeff());
  if (!(resid < 1e-6 * scale)) {
    std::ostringstream msg;
    msg << "offshell_extend: singular extension system, relative residual "
        << resid / scale;
    throw std::runtime_error(msg.str());
  }
  return tz;
}

namespace {

// z-independent recoupling tables for the kernel assembly
struct PermutationTables {
  int nx = 0;
  std::vector<double> xw;                 // angular weights
  std::vector<double> jac;                // [iq][lq][ix] flattened
  std::vector<Eigen::VectorXd> b1, b2;    // interpolation weights at pi1, pi2
};

PermutationTables build_tables(const JacobiGrid& grids, double m, bool relativistic, int nx) {
  PermutationTables tab;
  tab.nx = nx;
  std::vector<double> xn;
  gauss_legendre(nx, xn, tab.xw);
  const int nq = grids.q_grid.size();
  const BarycentricInterp interp(grids.k_grid);

  tab.jac.resize(static_cast<std::size_t>(nq) * nq * nx);
  tab.b1.resize(tab.jac.size());
  tab.b2.resize(tab.jac.size());
  std::vector<double> c;
  const double cap = grids.k_grid.capped() ? grids.k_grid.cap
                                           : std::numeric_limits<double>::infinity();
  for (int iq = 0; iq < nq; ++iq)
    for (int lq = 0; lq < nq; ++lq)
      for (int ix = 0; ix < nx; ++ix) {
        const auto g = permutation_geometry(grids.q_grid.nodes[iq], grids.q_grid.nodes[lq],
                                            xn[ix], m, relativistic);
        const std::size_t idx =
            (static_cast<std::size_t>(iq) * nq + lq) * nx + ix;
        tab.jac[idx] = g.jac;
        // beyond a capped grid the amplitudes are treated as zero
        if (g.pi1 > cap) {
          tab.b1[idx] = Eigen::VectorXd::Zero(grids.k_grid.size());
        } else {
          interp.weights(g.pi1, c);
          tab.b1[idx] = Eigen::Map<Eigen::VectorXd>(c.data(), grids.k_grid.size());
        }
        if (g.pi2 > cap) {
          tab.b2[idx] = Eigen::VectorXd::Zero(grids.k_grid.size());
        } else {
          interp.weights(g.pi2, c);
          tab.b2[idx] = Eigen::Map<Eigen::VectorXd>(c.data(), grids.k_grid.size());
        }
      }
  return tab;
}

struct KernelWorkspace {
  PairHamiltonian h;
  PermutationTables tab;
  std::vector<Eigen::MatrixXd> vq;       // per q node
  std::vector<Eigen::VectorXd> w0;       // per q node, on the k grid
  std::vector<Eigen::MatrixXd> t_anchor; // per q node, for resolvent extension
  double z_anchor = 0.0;
};

KernelWorkspace build_workspace(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                                const FaddeevOptions& opt) {
  KernelWorkspace ws;
  ws.h = build_pair_hamiltonian(v, 0.5 * m);
  ws.tab = build_tables(grids, m, opt.relativistic, opt.n_angle);
  const int nq = grids.q_grid.size();
  const int nk = grids.k_grid.size();
  ws.vq.reserve(nq);
  ws.w0.reserve(nq);
  for (int iq = 0; iq < nq; ++iq) {
    const double q = grids.q_grid.nodes[iq];
    if (!opt.relativistic) {
      ws.vq.push_back(v.values);
    } else if (opt.kernel_source == PairKernelSource::spectral) {
      ws.vq.push_back(vq_kernel(ws.h, v, m, q, true));
    } else {
      const SqrtShiftKernel ssk(v, 0.5 * m, m * m + 0.25 * q * q);
      ws.vq.push_back(2.0 * ssk.values());
    }
    Eigen::VectorXd w0(nk);
    for (int ik = 0; ik < nk; ++ik)
      w0[ik] = w0_boson(grids.k_grid.nodes[ik], q, m, opt.relativistic);
    ws.w0.push_back(w0);
  }
  return ws;
}

Eigen::MatrixXd kernel_matrix(const KernelWorkspace& ws, const JacobiGrid& grids, double m,
                              double z, const FaddeevOptions& opt) {
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  const int nx = ws.tab.nx;
  Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(nk * nq, nk * nq);

  for (int iq = 0; iq < nq; ++iq) {
    Eigen::MatrixXd t;
    if (opt.strategy == TmatrixStrategy::direct || ws.t_anchor.empty()) {
      t = embedded_tmatrix(ws.vq[iq], ws.w0[iq], grids.k_grid, z);
    } else {
      t = offshell_extend(ws.t_anchor[iq], ws.w0[iq], grids.k_grid, z, ws.z_anchor);
    }

    Eigen::VectorXd pref(nk);
    for (int ik = 0; ik < nk; ++ik) pref[ik] = 1.0 / (z - ws.w0[iq][ik]);

    for (int lq = 0; lq < nq; ++lq) {
      const double qmeas = grids.q_grid.weights[lq] * grids.q_grid.nodes[lq] *
                           grids.q_grid.nodes[lq];
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t idx = (static_cast<std::size_t>(iq) * nq + lq) * nx + ix;
        const double coef = ws.tab.xw[ix] * ws.tab.jac[idx] * qmeas;
        const Eigen::VectorXd tcol = t * ws.tab.b1[idx];  // t(k_i, pi1)
        kmat.block(iq * nk, lq * nk, nk, nk).noalias() +=
            (coef * pref.cwiseProduct(tcol)) * ws.tab.b2[idx].transpose();
      }
    }
  }
  return kmat;
}

double pair_bound_mass(const PairHamiltonian& h, double m, bool relativistic) {
  const double e2 = h.evals[0];
  if (e2 >= 0.0) return 0.0;  // unbound pair
  return relativistic ? 2.0 * std::sqrt(m * (m + e2)) : 2.0 * m + e2;
}

// Algebraically largest eigenvalue of the kernel.  A repulsive core puts
// large negative and complex eigenvalues in the spectrum, so the
// magnitude-dominant one is not always the physical branch; a spectral shift
// makes the largest real part dominate.  The shift escalates when a complex
// pair still wins the magnitude contest.
double dominant_real_eigenvalue(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = 1.0 / (1.0 + i);
  u.normalize();
  double radius = 0.0;
  for (int it = 0; it < 12; ++it) {
    u = a * u;
    radius = u.norm();
    if (radius == 0.0) return 0.0;
    u /= radius;
  }

  double sigma = 3.0 * radius + 1.0;
  for (int attempt = 0; attempt < 3; ++attempt, sigma *= 3.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += sigma;
    try {
      const DominantEig dom = largest_eigenvalue(shifted, 4000 * (attempt + 1));
      if (std::abs(dom.value.imag()) < 1e-8 * std::abs(dom.value))
        return dom.value.real() - sigma;
    } catch (const std::runtime_error&) {
      // escalate the shift
    }
  }

  // last resort: full spectrum, pick the largest real eigenvalue
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dominant_real_eigenvalue: dense eigensolve failed");
  bool found = false;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) < 1e-8 * (1.0 + std::abs(ev)) && (!found || ev.real() > best)) {
      best = ev.real();
      found = true;
    }
  }
  if (!found) throw std::runtime_error("dominant_real_eigenvalue: no real eigenvalue found");
  return best;
}

}  // namespace

FaddeevKernel assemble_faddeev_kernel(const PartialWaveKernel& v, double m, double z,
                                      const JacobiGrid& grids, const FaddeevOptions& opt) {
  if (!(m > 0.0)) throw std::invalid_argument("assemble_faddeev_kernel: mass must be positive");
  const double threshold = 3.0 * m;
  if (opt.relativistic && z >= threshold)
    throw std::invalid_argument("assemble_faddeev_kernel: z must lie below the 3m threshold");

  KernelWorkspace ws = build_workspace(v, m, grids, opt);
  if (opt.strategy == TmatrixStrategy::resolvent_extend) {
    // anchor the pair t matrices once, then move in z with the resolvent identity
    ws.z_anchor = 0.5 * (z + 2.0 * m);
    if (ws.z_anchor != z) {
      for (int iq = 0; iq < grids.q_grid.size(); ++iq)
        ws.t_anchor.push_back(
            embedded_tmatrix(ws.vq[iq], ws.w0[iq], grids.k_grid, ws.z_anchor));
    }
  }

  FaddeevKernel out;
  out.z = z;
  out.grids = grids;
  out.matrix = kernel_matrix(ws, grids, m, z, opt);
  return out;
}

namespace {

TrimerSolution trimer_search(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                             const FaddeevOptions& opt) {
  KernelWorkspace ws = build_workspace(v, m, grids, opt);
  TrimerSolution sol;
  sol.pair_mass = pair_bound_mass(ws.h, m, opt.relativistic);

  const double z_lo = 2.0 * m;
  const double z_hi =
      (sol.pair_mass > 0.0 ? m + sol.pair_mass : 3.0 * m) - 1e-4 * m;

  if (opt.strategy == TmatrixStrategy::resolvent_extend) {
    ws.z_anchor = 0.5 * (z_lo + z_hi);
    for (int iq = 0; iq < grids.q_grid.size(); ++iq)
      ws.t_anchor.push_back(embedded_tmatrix(ws.vq[iq], ws.w0[iq], grids.k_grid, ws.z_anchor));
  }

  auto eta_at = [&](double z) {
    const Eigen::MatrixXd km = kernel_matrix(ws, grids, m, z, opt);
    const double eta = dominant_real_eigenvalue(km);
    sol.eta_history.emplace_back(z, eta);
    return eta;
  };

  // coarse scan from the threshold downward; eta decreases monotonically as
  // z moves away from it, so the scan stops at the first crossing
  std::vector<double> zs, etas;
  int ihi = -1;
  for (int i = 0; i < opt.scan_points; ++i) {
    zs.push_back(z_hi - (z_hi - z_lo) * i / (opt.scan_points - 1.0));
    etas.push_back(eta_at(zs.back()));
    if (i > 0 && etas[i] > etas[i - 1] + 1e-10) {
      std::ostringstream msg;
      msg << "solve_trimer: eta(z) not monotone over the scan: eta(" << zs[i - 1]
          << ") = " << etas[i - 1] << ", eta(" << zs[i] << ") = " << etas[i];
      throw std::runtime_error(msg.str());
    }
    if (etas[i] < 1.0) {
      if (i > 0 && etas[i - 1] >= 1.0) ihi = i - 1;
      break;
    }
  }
  if (ihi < 0) {
    sol.bound = false;
    return sol;  // no crossing inside the bracket: no bound state reported
  }

  // Illinois-modified false position on eta(z) - 1
  double za = zs[ihi], fa = etas[ihi] - 1.0;          // eta >= 1, upper z
  double zb = zs[ihi + 1], fb = etas[ihi + 1] - 1.0;  // eta < 1, lower z
  double zmid = 0.5 * (za + zb);
  int side = 0;
  for (int it = 0; it < 200 && std::abs(za - zb) > opt.z_tol; ++it) {
    double zc = zb - fb * (za - zb) / (fa - fb);
    if (!(zc > std::min(za, zb) && zc < std::max(za, zb))) zc = 0.5 * (za + zb);
    const double fc = eta_at(zc) - 1.0;
    if (fc >= 0.0) {
      za = zc;
      fa = fc;
      if (side == +1) fb *= 0.5;
      side = +1;
    } else {
      zb = zc;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
    zmid = 0.5 * (za + zb);
  }

  sol.bound = true;
  sol.mass = zmid;

  // Faddeev component at the solution
  const Eigen::MatrixXd km = kernel_matrix(ws, grids, m, sol.mass, opt);
  const DominantEig dom = largest_eigenvalue(km);
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  sol.psi.resize(nk, nq);
  double norm = 0.0;
  for (int iq = 0; iq < nq; ++iq)
    for (int ik = 0; ik < nk; ++ik) {
      const double val = dom.vector[ik + nk * iq].real();
      sol.psi(ik, iq) = val;
      norm += grids.k_grid.weights[ik] * grids.k_grid.nodes[ik] * grids.k_grid.nodes[ik] *
              grids.q_grid.weights[iq] * grids.q_grid.nodes[iq] * grids.q_grid.nodes[iq] *
              val * val;
    }
  sol.psi /= std::sqrt(norm);
  // deterministic sign: largest-magnitude entry positive
  int rmax = 0, cmax = 0;
  sol.psi.cwiseAbs().maxCoeff(&rmax, &cmax);
  if (sol.psi(rmax, cmax) < 0.0) sol.psi = -sol.psi;
  return sol;
}

}  // namespace

TrimerSolution solve_trimer(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                            const FaddeevOptions& opt) {
  return trimer_search(v, m, grids, opt);
}

TrimerSolution solve_trimer_nonrel(const PartialWaveKernel& v, double m,
                                   const JacobiGrid& grids, FaddeevOptions opt) {
  opt.relativistic = false;
  return trimer_search(v, m, grids, opt);
}

namespace {

struct OracleChannelCoords {
  double k = 0.0, q = 0.0, x = 1.0;
};

// Filtered spectral evaluation on Gauss-Legendre samples over [-1,1]:
// f(t) ~ sum_{L<=Lmax} P_L(t) (2L+1)/2 sum_j w_j P_L(t_j) f_j.
// Unlike the interpolating polynomial, the truncated Legendre series stays
// uniformly bounded up to the interval endpoints, which is where the
// recoupling maps concentrate their evaluations.
class LegendreEval {
 public:
  static void legendre_all(double t, int lmax, std::vector<double>& p) {
    p.resize(lmax + 1);
    p[0] = 1.0;
    if (lmax >= 1) p[1] = t;
    for (int l = 1; l < lmax; ++l)
      p[l + 1] = ((2.0 * l + 1.0) * t * p[l] - l * p[l - 1]) / (l + 1.0);
  }

  LegendreEval(const std::vector<double>& t, const std::vector<double>& w, int lmax)
      : lmax_(lmax), n_(static_cast<int>(t.size())), proj_(lmax + 1, n_) {
    std::vector<double> p;
    for (int j = 0; j < n_; ++j) {
      legendre_all(t[j], lmax_, p);
      for (int l = 0; l <= lmax_; ++l)
        proj_(l, j) = (2.0 * l + 1.0) / 2.0 * w[j] * p[l];
    }
  }

  void weights(double t, std::vector<double>& c) const {
    c.assign(n_, 0.0);
    std::vector<double> p;
    legendre_all(t, lmax_, p);
    for (int l = 0; l <= lmax_; ++l)
      for (int j = 0; j < n_; ++j) c[j] += p[l] * proj_(l, j);
  }

 private:
  int lmax_, n_;
  Eigen::MatrixXd proj_;
};

// base Gauss-Legendre coordinate of a capped grid, in [-1,1]
double base_coord(const QuadratureGrid& g, double k) {
  const double x = g.x_of_k(k);
  const double x_hi = g.capped() ? g.x_of_k(g.cap) : 1.0;
  return (2.0 * x - (x_hi - 1.0)) / (x_hi + 1.0);
}

// momenta of the (k,q,x) configuration in the rest frame
void oracle_momenta(double k, double q, double x, double m, bool relativistic, Vector3d& p1,
                    Vector3d& p2, Vector3d& p3) {
  const Vector3d qv(0.0, 0.0, q);
  const Vector3d kv(k * std::sqrt(std::max(0.0, 1.0 - x * x)), 0.0, k * x);
  p3 = qv;
  if (!relativistic) {
    p1 = kv - 0.5 * qv;
    p2 = -kv - 0.5 * qv;
    return;
  }
  const double m12 = 2.0 * omega(m, k);
  const LorentzTransform b = boost_canonical(m12, -qv);
  p1 = b.apply(onshell(m, kv)).r;
  p2 = b.apply(onshell(m, -kv)).r;
}

// channel coordinates of a pair/spectator split of (pa, pb | spectator ps)
OracleChannelCoords channel_coords(const Vector3d& pa, const Vector3d& pb, const Vector3d& ps,
                                   double m, bool relativistic) {
  OracleChannelCoords c;
  c.q = ps.norm();
  Vector3d kv;
  if (relativistic)
    kv = relative_momentum(onshell(m, pa), onshell(m, pb));
  else
    kv = 0.5 * (pa - pb);
  c.k = kv.norm();
  c.x = (c.k > 1e-12 && c.q > 1e-12) ? std::clamp(kv.dot(ps) / (c.k * c.q), -1.0, 1.0) : 1.0;
  return c;
}

}  // namespace

Eigen::MatrixXd trimer_oracle_matrix(const PartialWaveKernel& v, double m,
                                     const JacobiGrid& grids, int nx, bool relativistic) {
  const PairHamiltonian h = build_pair_hamiltonian(v, 0.5 * m);
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  const int dim = nk * nq * nx;
  if (dim > 6000)
    throw std::invalid_argument("trimer_oracle_matrix: basis too large to diagonalize");

  std::vector<double> xn, xw;
  gauss_legendre(nx, xn, xw);

  const auto& kg = grids.k_grid;
  const auto& qg = grids.q_grid;

  // Filtered Legendre evaluation in every coordinate: the recoupling maps
  // evaluate amplitudes right up to the interval endpoints (collinear
  // configurations, k near 0 or the cap), where interpolating polynomials
  // through Gauss nodes oscillate; truncated Legendre series stay bounded.
  std::vector<double> tbase, wbase, tq, wq_base;
  gauss_legendre(nk, tbase, wbase);
  gauss_legendre(nq, tq, wq_base);
  const LegendreEval keval(tbase, wbase, std::max(1, nk - 3));
  const LegendreEval qeval(tq, wq_base, std::max(1, nq - 3));
  const LegendreEval xeval(xn, xw, std::max(1, nx - 3));

  auto kmeas = [&](int ik) { return kg.weights[ik] * kg.nodes[ik] * kg.nodes[ik]; };
  auto qmeas = [&](int iq) { return qg.weights[iq] * qg.nodes[iq] * qg.nodes[iq]; };
  auto index = [&](int ik, int iq, int ix) { return (ik * nq + iq) * nx + ix; };
  auto smeas = [&](int ik, int iq, int ix) {
    return std::sqrt(kmeas(ik) * qmeas(iq) * 0.5 * xw[ix]);
  };
  // q is diagonal in the channel-a block, so its measure cancels there
  auto skx = [&](int ik, int ix) { return std::sqrt(kmeas(ik) * 0.5 * xw[ix]); };

  // channel-a interaction: s-wave projector in x times the embedded pair kernel
  std::vector<Eigen::MatrixXd> vq_a(nq);
  for (int iq = 0; iq < nq; ++iq) {
    const double q = qg.nodes[iq];
    vq_a[iq] = relativistic
                   ? h.mapped_kernel([m, q](double e) { return fq_map(e, m, q); })
                   : v.values;
  }

  // The operator is kept in raw sample space (rows act on wavefunction
  // samples).  Rescaling rows and columns by the square-root measure would
  // amplify interpolation crumbs across the huge measure range of the mapped
  // grids and seed spurious deep eigenvalues.
  Eigen::MatrixXd mop = Eigen::MatrixXd::Zero(dim, dim);

  // M0 diagonal
  for (int ik = 0; ik < nk; ++ik)
    for (int iq = 0; iq < nq; ++iq)
      for (int ix = 0; ix < nx; ++ix)
        mop(index(ik, iq, ix), index(ik, iq, ix)) =
            w0_boson(kg.nodes[ik], qg.nodes[iq], m, relativistic);

  // channel a: x-independent output of the s-wave projected kernel
  for (int iq = 0; iq < nq; ++iq)
    for (int ik = 0; ik < nk; ++ik)
      for (int ix = 0; ix < nx; ++ix) {
        const int row = index(ik, iq, ix);
        for (int lk = 0; lk < nk; ++lk)
          for (int lx = 0; lx < nx; ++lx) {
            const int col = index(lk, iq, lx);
            // kernel against the measure times the x projector (1/2) sum w_x'
            mop(row, col) += vq_a[iq](ik, lk) * kmeas(lk) * 0.5 * xw[lx];
          }
      }

  // channels b and c through the coordinate maps, assembled row by row
  Eigen::MatrixXd vb = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd vc = Eigen::MatrixXd::Zero(dim, dim);

  auto fq_std = [&](double q) {
    return [m, q](double e) { return fq_map(e, m, q); };
  };
  auto fqp_std = [&](double q) {
    return [m, q](double e) { return fq_map_deriv(e, m, q); };
  };

  for (int ik = 0; ik < nk; ++ik)
    for (int iq = 0; iq < nq; ++iq)
      for (int ix = 0; ix < nx; ++ix) {
        const int row = index(ik, iq, ix);
        Vector3d p1, p2, p3;
        oracle_momenta(kg.nodes[ik], qg.nodes[iq], xn[ix], m, relativistic, p1, p2, p3);

        // channel b: pair (23), spectator 1; channel c: pair (31), spectator 2
        const OracleChannelCoords cb = channel_coords(p2, p3, p1, m, relativistic);
        const OracleChannelCoords cc = channel_coords(p3, p1, p2, m, relativistic);

        // relativistic representation-change volume factors: a channel-b
        // wavefunction value is sqrt(Jb/Ja) times the channel-a value at the
        // same configuration
        const double ja_row =
            relativistic
                ? pair_jacobian(m, m, kg.nodes[ik], p1.norm(), p2.norm(), qg.nodes[iq])
                : 1.0;

        for (int chan = 0; chan < 2; ++chan) {
          const OracleChannelCoords& cco = chan == 0 ? cb : cc;
          Eigen::MatrixXd& target = chan == 0 ? vb : vc;

          double row_fac = 1.0;
          if (relativistic) {
            const double jb_row =
                (chan == 0) ? pair_jacobian(m, m, cb.k, p2.norm(), p3.norm(), cb.q)
                            : pair_jacobian(m, m, cc.k, p3.norm(), p1.norm(), cc.q);
            row_fac = std::sqrt(ja_row / jb_row);
          }

          // interaction row v_q(k_chan, k_l) at the off-grid pair momentum
          Eigen::VectorXd vrow;
          if (relativistic)
            vrow = h.mapped_kernel_row(v, fq_std(cco.q), fqp_std(cco.q), cco.k);
          else {
            vrow.resize(nk);
            for (int l = 0; l < nk; ++l) vrow[l] = v.eval(cco.k, kg.nodes[l]);
          }

          // spread over the s-wave projected source: for each quadrature x'',
          // locate the a-coordinates of the channel configuration
          const double kcap = kg.capped() ? kg.cap : std::numeric_limits<double>::infinity();
          const double qcap = qg.capped() ? qg.cap : std::numeric_limits<double>::infinity();
          for (int lk = 0; lk < nk; ++lk) {
            const double coup = vrow[lk] * kmeas(lk);
            for (int mx = 0; mx < nx; ++mx) {
              Vector3d b1, b2, b3;
              // canonical orientation of the channel shape (k_l, q_chan, x'')
              oracle_momenta(kg.nodes[lk], cco.q, xn[mx], m, relativistic, b1, b2, b3);
              // back to a-coordinates: spectator is particle 3 of the
              // original labeling; for channel b the reconstructed momenta
              // (b1,b2,b3) play the roles (2,3,1), for channel c (3,1,2)
              OracleChannelCoords ca;
              if (chan == 0)
                ca = channel_coords(b3, b1, b2, m, relativistic);  // pair (12) = (b3,b1)
              else
                ca = channel_coords(b2, b3, b1, m, relativistic);
              if (ca.k > kcap || ca.q > qcap) continue;  // amplitude zero beyond the cap
              double src_fac = 1.0;
              if (relativistic) {
                const double jb_src =
                    pair_jacobian(m, m, kg.nodes[lk], b1.norm(), b2.norm(), cco.q);
                const double ja_src =
                    (chan == 0)
                        ? pair_jacobian(m, m, ca.k, b3.norm(), b1.norm(), ca.q)
                        : pair_jacobian(m, m, ca.k, b2.norm(), b3.norm(), ca.q);
                src_fac = std::sqrt(jb_src / ja_src);
              }
              std::vector<double> wk, wq, wx;
              keval.weights(base_coord(kg, ca.k), wk);
              qeval.weights(base_coord(qg, ca.q), wq);
              xeval.weights(ca.x, wx);
              const double pref = row_fac * coup * 0.5 * xw[mx] * src_fac;
              for (int a = 0; a < nk; ++a) {
                const double pa = pref * wk[a];
                if (pa == 0.0) continue;
                for (int b = 0; b < nq; ++b) {
                  const double pb = pa * wq[b];
                  if (pb == 0.0) continue;
                  for (int c = 0; c < nx; ++c)
                    target(row, index(a, b, c)) += pb * wx[c];
                }
              }
            }
          }
        }
      }

  mop += vb;
  mop += vc;
  (void)smeas;
  (void)skx;
  return mop;
}

double trimer_oracle_mass(const PartialWaveKernel& v, double m, const JacobiGrid& grids,
                          int nx, bool relativistic, double* sym_residual) {
  const Eigen::MatrixXd mop = trimer_oracle_matrix(v, m, grids, nx, relativistic);
  const int nk = grids.k_grid.size();
  const int nq = grids.q_grid.size();
  const int dim = nk * nq * nx;
  const auto& kg = grids.k_grid;
  const auto& qg = grids.q_grid;

  std::vector<double> xn, xw;
  gauss_legendre(nx, xn, xw);
  auto kmeas = [&](int ik) { return kg.weights[ik] * kg.nodes[ik] * kg.nodes[ik]; };
  auto qmeas = [&](int iq) { return qg.weights[iq] * qg.nodes[iq] * qg.nodes[iq]; };
  auto index = [&](int ik, int iq, int ix) { return (ik * nq + iq) * nx + ix; };

  // general (nonsymmetric) eigensolve; the physical bound state is the
  // isolated lowest real eigenvalue
  Eigen::EigenSolver<Eigen::MatrixXd> es(mop);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("trimer_oracle_mass: eigensolve failed");
  int best = -1;
  for (int i = 0; i < dim; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) > 1e-7 * (1.0 + std::abs(ev))) continue;
    if (best < 0 || ev.real() < es.eigenvalues()[best].real()) best = i;
  }
  if (best < 0) throw std::runtime_error("trimer_oracle_mass: no real eigenvalue found");
  const double mass = es.eigenvalues()[best].real();

  if (sym_residual) {
    // total symmetry of the ground state: reading the wavefunction through
    // the channel-b coordinates (with the representation volume factor)
    // must reproduce it
    std::vector<double> tbase, wbase, tqb, wqb;
    gauss_legendre(nk, tbase, wbase);
    gauss_legendre(nq, tqb, wqb);
    const LegendreEval keval(tbase, wbase, std::max(1, nk - 3));
    const LegendreEval qeval(tqb, wqb, std::max(1, nq - 3));
    const LegendreEval xeval(xn, xw, std::max(1, nx - 3));

    Eigen::VectorXd psi(dim);
    for (int i = 0; i < dim; ++i) psi[i] = es.eigenvectors().col(best)[i].real();
    double num = 0.0, den = 0.0;
    std::vector<double> wk, wq, wx;
    for (int ik = 0; ik < nk; ++ik)
      for (int iq = 0; iq < nq; ++iq)
        for (int ix = 0; ix < nx; ++ix) {
          const int idx = index(ik, iq, ix);
          Vector3d p1, p2, p3;
          oracle_momenta(kg.nodes[ik], qg.nodes[iq], xn[ix], m, relativistic, p1, p2, p3);
          const OracleChannelCoords cb = channel_coords(p2, p3, p1, m, relativistic);
          const double kcap = kg.capped() ? kg.cap : std::numeric_limits<double>::infinity();
          const double qcap = qg.capped() ? qg.cap : std::numeric_limits<double>::infinity();
          if (cb.k > kcap || cb.q > qcap) continue;
          double fac = 1.0;
          if (relativistic) {
            const double ja =
                pair_jacobian(m, m, kg.nodes[ik], p1.norm(), p2.norm(), qg.nodes[iq]);
            const double jb = pair_jacobian(m, m, cb.k, p2.norm(), p3.norm(), cb.q);
            fac = std::sqrt(jb / ja);
          }
          keval.weights(base_coord(kg, cb.k), wk);
          qeval.weights(base_coord(qg, cb.q), wq);
          xeval.weights(cb.x, wx);
          double interp = 0.0;
          for (int a = 0; a < nk; ++a)
            for (int b = 0; b < nq; ++b)
              for (int c = 0; c < nx; ++c)
                interp += wk[a] * wq[b] * wx[c] * psi[index(a, b, c)];
          const double w = kmeas(ik) * qmeas(iq) * 0.5 * xw[ix];
          num += w * (interp - fac * psi[idx]) * (interp - fac * psi[idx]);
          den += w * psi[idx] * psi[idx];
        }
    *sym_residual = std::sqrt(num / den);
  }

  return mass;
}

}  // namespace piqm
