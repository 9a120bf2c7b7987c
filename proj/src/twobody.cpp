#include "piqm/twobody.hpp"

#include <cmath>
#include <stdexcept>

namespace piqm {

namespace {

double mt_pair_term(double lambda, double mu, double kp, double k) {
  // lambda/(2 pi k k') ln(((k+k')^2+mu^2)/((k-k')^2+mu^2)) with a stable
  // small-argument expansion of the log
  const double d = (k - kp) * (k - kp) + mu * mu;
  const double x = 4.0 * k * kp / d;
  if (x < 1e-4) {
    const double series = 1.0 - 0.5 * x + x * x / 3.0 - 0.25 * x * x * x;
    return lambda * 2.0 / (M_PI * d) * series;
  }
  return lambda / (2.0 * M_PI * k * kp) * std::log1p(x);
}

}  // namespace

PartialWaveKernel malfliet_tjon_kernel(const MtParams& params, const QuadratureGrid& grid) {
  if (!(params.mu_r > 0.0) || !(params.mu_a > 0.0))
    throw std::invalid_argument("malfliet_tjon_kernel: ranges must be positive");

  PartialWaveKernel v;
  v.j = 0.0;
  v.channels = {{0, 0.0}};
  v.grid = grid;
  const MtParams p = params;
  v.eval = [p](double kp, double k) {
    return mt_pair_term(p.lambda_r, p.mu_r, kp, k) - mt_pair_term(p.lambda_a, p.mu_a, kp, k);
  };
  const int n = grid.size();
  v.values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      v.values(i, j) = v.values(j, i) = v.eval(grid.nodes[i], grid.nodes[j]);
  return v;
}

PairHamiltonian build_pair_hamiltonian(const PartialWaveKernel& v, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("build_pair_hamiltonian: mu must be positive");
  if (v.hermiticity_defect() > 1e-12 * std::max(1.0, v.values.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("build_pair_hamiltonian: kernel not hermitian");

  PairHamiltonian h;
  h.grid = v.grid;
  h.mu = mu;
  const int n = v.grid.size();
  h.s.resize(n);
  h.e0.resize(n);
  for (int i = 0; i < n; ++i) {
    h.s[i] = v.grid.nodes[i] * std::sqrt(v.grid.weights[i]);
    h.e0[i] = v.grid.nodes[i] * v.grid.nodes[i] / (2.0 * mu);
  }
  Eigen::MatrixXd hsym = h.e0.asDiagonal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hsym(i, j) += h.s[i] * v.values(i, j) * h.s[j];

  const EigenSolution sol =
      symmetric_eigensolve({hsym, true, v.grid.descriptor, v.grid.descriptor});
  h.evals = sol.values;
  h.evecs = sol.vectors;
  return h;
}

Eigen::MatrixXd PairHamiltonian::mapped_kernel(const std::function<double(double)>& f) const {
  const int n = static_cast<int>(s.size());
  Eigen::VectorXd fe(n);
  for (int i = 0; i < n; ++i) fe[i] = f(evals[i]);
  const Eigen::MatrixXd msym = evecs * fe.asDiagonal() * evecs.transpose();
  Eigen::MatrixXd kernel(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double val = msym(i, j);
      if (i == j) val -= f(e0[i]);
      kernel(i, j) = val / (s[i] * s[j]);
    }
  return 0.5 * (kernel + kernel.transpose());
}

Eigen::VectorXd PairHamiltonian::mapped_kernel_row(const PartialWaveKernel& v,
                                                   const std::function<double(double)>& f,
                                                   const std::function<double(double)>& fp,
                                                   double x) const {
  if (!v.eval)
    throw std::invalid_argument("mapped_kernel_row: kernel needs an analytic evaluator");
  const int n = grid.size();
  const double dx = x * x / (2.0 * mu);

  // Extend the Nystrom matrix with a zero-weight row at x; the matrix is
  // block triangular, so the off-grid row of f(H) - f(H0) is the coupling
  // row contracted with the divided difference phi(e) = (f(e)-f(dx))/(e-dx).
  Eigen::VectorXd b(n);
  for (int l = 0; l < n; ++l)
    b[l] = v.eval(x, grid.nodes[l]) * grid.weights[l] * grid.nodes[l] * grid.nodes[l];
  Eigen::VectorXd phi(n);
  const double fdx = f(dx);
  for (int nn = 0; nn < n; ++nn) {
    const double de = evals[nn] - dx;
    phi[nn] = (std::abs(de) < 1e-9 * std::max(1.0, std::abs(dx)))
                  ? fp(0.5 * (evals[nn] + dx))
                  : (f(evals[nn]) - fdx) / de;
  }
  // row = b^T S^-1 U phi(L) U^T S, then kernel values by dividing the measure
  Eigen::VectorXd y = (b.array() / s.array()).matrix();
  y = evecs.transpose() * y;
  y = (phi.array() * y.array()).matrix();
  y = evecs * y;
  Eigen::VectorXd row(n);
  for (int l = 0; l < n; ++l)
    row[l] = y[l] * s[l] / (grid.weights[l] * grid.nodes[l] * grid.nodes[l]);
  return row;
}

Eigen::MatrixXd MassOperator::matrix() const {
  const int n = grid.size();
  Eigen::MatrixXd m = kinetic.asDiagonal();
  for (int i = 0; i < n; ++i) {
    const double si = grid.nodes[i] * std::sqrt(grid.weights[i]);
    for (int j = 0; j < n; ++j) {
      const double sj = grid.nodes[j] * std::sqrt(grid.weights[j]);
      m(i, j) += si * interaction(i, j) * sj;
    }
  }
  return m;
}

double MassOperator::hermiticity_defect() const { return piqm::hermiticity_defect(matrix()); }

MassOperator coester_embed(const PartialWaveKernel& v_nr, double m1, double m2) {
  if (!(m1 > 0.0) || !(m2 > 0.0))
    throw std::invalid_argument("coester_embed: masses must be positive");
  const double mu = m1 * m2 / (m1 + m2);
  const PairHamiltonian h = build_pair_hamiltonian(v_nr, mu);

  const double m2min = std::min(m1 * m1, m2 * m2);
  if (2.0 * mu * h.evals[0] + m2min < 0.0)
    throw std::runtime_error(
        "coester_embed: unphysical potential, 2 mu e + m^2 < 0 for the lowest eigenvalue");

  auto mass_map = [mu, m1, m2](double e) {
    return std::sqrt(2.0 * mu * e + m1 * m1) + std::sqrt(2.0 * mu * e + m2 * m2);
  };

  MassOperator op;
  op.m1 = m1;
  op.m2 = m2;
  op.grid = v_nr.grid;
  const int n = v_nr.grid.size();
  op.kinetic.resize(n);
  for (int i = 0; i < n; ++i) {
    const double k = v_nr.grid.nodes[i];
    op.kinetic[i] = omega(m1, k) + omega(m2, k);
  }
  op.interaction = h.mapped_kernel(mass_map);
  return op;
}

SqrtShiftKernel::SqrtShiftKernel(const PartialWaveKernel& v, double mu, double c, int nt)
    : grid_(v.grid), mu_(mu), c_(c), veval_(v.eval) {
  if (!(mu > 0.0) || !(c > 0.0))
    throw std::invalid_argument("SqrtShiftKernel: need mu > 0 and c > 0");
  const int n = grid_.size();
  meas_.resize(n);
  for (int i = 0; i < n; ++i) meas_[i] = grid_.weights[i] * grid_.nodes[i] * grid_.nodes[i];
  vk_ = v.values;
  if (!veval_) {
    throw std::invalid_argument("SqrtShiftKernel: kernel needs an analytic evaluator");
  }

  // resolvent quadrature, rational map scaled to the branch-point region
  const QuadratureGrid tg = make_grid(nt, std::sqrt(c), GridMapping::rational);
  tn_ = tg.nodes;
  tw_ = tg.weights;

  // factor Bop + t^2 with Bop = diag(k^2 + c) + 2 mu v(k_i,k_j) w_j k_j^2
  Eigen::MatrixXd bop(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      bop(i, j) = 2.0 * mu_ * vk_(i, j) * meas_[j] + ((i == j) ? dshift(grid_.nodes[i]) : 0.0);
  lu_.reserve(tn_.size());
  vals_.setZero(n, n);
  Eigen::VectorXd dr(n);
  for (int i = 0; i < n; ++i) dr[i] = std::sqrt(dshift(grid_.nodes[i]));

  xi_.reserve(tn_.size());
  for (std::size_t it = 0; it < tn_.size(); ++it) {
    const double t = tn_[it];
    Eigen::MatrixXd a = bop;
    a.diagonal().array() += t * t;
    lu_.emplace_back(a);
    // second-order term: Y = v W (Bop+t^2)^-1 v, accumulated on the grid
    xi_.push_back(lu_.back().solve(vk_));
    const Eigen::MatrixXd& xi = xi_.back();
    const Eigen::MatrixXd y = vk_ * meas_.asDiagonal() * xi;
    const double pref = -2.0 / M_PI * tw_[it] * t * t * (2.0 * mu_) * (2.0 * mu_);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        vals_(i, j) += pref * y(i, j) / ((dshift(grid_.nodes[i]) + t * t) *
                                         (dshift(grid_.nodes[j]) + t * t));
  }
  // analytic first Born term
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) vals_(i, j) += 2.0 * mu_ * vk_(i, j) / (dr[i] + dr[j]);
  vals_ = 0.5 * (vals_ + vals_.transpose()).eval();
}

double SqrtShiftKernel::at(double p, double q) const {
  const int n = grid_.size();
  Eigen::VectorXd vq(n), vp(n);
  for (int i = 0; i < n; ++i) {
    vq[i] = veval_(grid_.nodes[i], q);
    vp[i] = veval_(p, grid_.nodes[i]);
  }
  const double dp = dshift(p), dq = dshift(q);
  double out = 2.0 * mu_ * veval_(p, q) / (std::sqrt(dp) + std::sqrt(dq));
  for (std::size_t it = 0; it < tn_.size(); ++it) {
    const double t = tn_[it];
    const Eigen::VectorXd xi = lu_[it].solve(vq);
    double y = 0.0;
    for (int l = 0; l < n; ++l) y += vp[l] * meas_[l] * xi[l];
    out -= 2.0 / M_PI * tw_[it] * t * t * (2.0 * mu_) * (2.0 * mu_) * y /
           ((dp + t * t) * (dq + t * t));
  }
  return out;
}

void SqrtShiftKernel::row_at(double x, Eigen::VectorXd& row) const {
  const int n = grid_.size();
  Eigen::VectorXd vx(n);
  for (int l = 0; l < n; ++l) vx[l] = veval_(x, grid_.nodes[l]);
  const double dx = dshift(x);
  row.resize(n);
  for (int j = 0; j < n; ++j)
    row[j] = 2.0 * mu_ * vx[j] / (std::sqrt(dx) + std::sqrt(dshift(grid_.nodes[j])));
  const Eigen::VectorXd vw = vx.cwiseProduct(meas_);
  for (std::size_t it = 0; it < tn_.size(); ++it) {
    const double t = tn_[it];
    const Eigen::VectorXd y = xi_[it].transpose() * vw;
    const double pref = -2.0 / M_PI * tw_[it] * t * t * (2.0 * mu_) * (2.0 * mu_);
    for (int j = 0; j < n; ++j)
      row[j] += pref * y[j] / ((dx + t * t) * (dshift(grid_.nodes[j]) + t * t));
  }
}

TwoBodySolution solve_bound_states(const MassOperator& op) {
  const EigenSolution sol =
      symmetric_eigensolve({op.matrix(), true, op.grid.descriptor, op.grid.descriptor});
  TwoBodySolution out;
  const double threshold = op.m1 + op.m2;
  const int n = op.grid.size();
  for (int i = 0; i < n && sol.values[i] < threshold; ++i) {
    out.bound_masses.push_back(sol.values[i]);
    Eigen::VectorXd phi(n);
    for (int a = 0; a < n; ++a)
      phi[a] = sol.vectors(a, i) / (op.grid.nodes[a] * std::sqrt(op.grid.weights[a]));
    out.bound_wavefunctions.push_back(phi);
  }
  return out;
}

double kmatrix_phase_shift(const QuadratureGrid& grid, const Eigen::MatrixXd& kernel,
                           const std::function<double(double, double)>& eval, double mu,
                           const std::function<double(double)>& f0,
                           const std::function<double(double)>& f0prime, double k_on) {
  if (!(k_on > 0.0)) throw std::invalid_argument("kmatrix_phase_shift: k_on must be positive");
  const int n = grid.size();

  // keep the on-shell point off the nodes; a relative nudge of 1e-9 moves
  // the phase shift far below solver tolerance
  double k0 = k_on;
  for (int i = 0; i < n; ++i)
    while (std::abs(k0 - grid.nodes[i]) < 1e-9 * k0) k0 *= 1.0 + 1e-9;

  // kernel values involving the off-grid on-shell point: analytic when an
  // evaluator exists, global interpolation on the mapped nodes otherwise
  Eigen::VectorXd col_k0(n);
  double corner = 0.0;
  if (eval) {
    for (int i = 0; i < n; ++i) col_k0[i] = eval(grid.nodes[i], k0);
    corner = eval(k0, k0);
  } else {
    BarycentricInterp interp(grid);
    std::vector<double> ck;
    interp.weights(k0, ck);
    const Eigen::Map<const Eigen::VectorXd> c(ck.data(), n);
    col_k0 = kernel * c;
    corner = col_k0.dot(c);
  }

  const double e0 = k0 * k0 / (2.0 * mu);
  auto gfactor = [&](double q) {
    const double e = q * q / (2.0 * mu);
    const double de = e0 - e;
    const double scale = std::max({1.0, std::abs(e0), std::abs(e)});
    if (std::abs(de) < 1e-9 * scale) return 2.0 * mu / f0prime(0.5 * (e0 + e));
    return 2.0 * mu * de / (f0(e0) - f0(e));
  };

  // subtraction constant: P int_0^inf dq/(k0^2-q^2) = 0, so the discrete sum
  // multiplies the on-shell column
  double sub = 0.0;
  for (int j = 0; j < n; ++j)
    sub += grid.weights[j] / ((k0 - grid.nodes[j]) * (k0 + grid.nodes[j]));

  const double gk0 = 2.0 * mu / f0prime(e0);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd b(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double vik0 = (i < n) ? col_k0[i] : corner;
    for (int j = 0; j < n; ++j) {
      const double q = grid.nodes[j];
      const double vij = (i < n) ? kernel(i, j) : col_k0[j];
      a(i, j) = -grid.weights[j] * q * q * vij * gfactor(q) / ((k0 - q) * (k0 + q));
    }
    a(i, n) = sub * k0 * k0 * vik0 * gk0;
    a(i, i) += 1.0;
    b[i] = vik0;
  }

  const Eigen::VectorXd kcol = a.partialPivLu().solve(b);
  const double rho = mu * k0 / f0prime(e0);
  return std::atan(-M_PI * rho * kcol[n]);
}

std::vector<double> solve_phase_shifts(const PartialWaveKernel& v, PhaseFramework fw,
                                       const std::vector<double>& k_on, double m1, double m2) {
  const double mu = m1 * m2 / (m1 + m2);
  std::vector<double> out;
  out.reserve(k_on.size());

  if (fw == PhaseFramework::nonrelativistic) {
    auto f0 = [](double e) { return e; };
    auto f0p = [](double) { return 1.0; };
    for (double k : k_on)
      out.push_back(kmatrix_phase_shift(v.grid, v.values, v.eval, mu, f0, f0p, k));
  } else {
    auto mass_map = [mu, m1, m2](double e) {
      return std::sqrt(2.0 * mu * e + m1 * m1) + std::sqrt(2.0 * mu * e + m2 * m2);
    };
    auto mass_map_p = [mu, m1, m2](double e) {
      return mu / std::sqrt(2.0 * mu * e + m1 * m1) + mu / std::sqrt(2.0 * mu * e + m2 * m2);
    };
    const bool equal = (m1 == m2);
    const SqrtShiftKernel s1(v, mu, m1 * m1);
    const SqrtShiftKernel* s2 = nullptr;
    SqrtShiftKernel s2store = s1;
    if (!equal) s2store = SqrtShiftKernel(v, mu, m2 * m2);
    s2 = &s2store;
    Eigen::MatrixXd vrel = s1.values() + s2->values();
    auto eval = [&s1, s2](double p, double q) { return s1.at(p, q) + s2->at(p, q); };
    for (double k : k_on)
      out.push_back(kmatrix_phase_shift(v.grid, vrel, eval, mu, mass_map, mass_map_p, k));
  }
  return out;
}

DynamicalIrrep build_dynamical_irrep(const TwoBodySolution& sol, BasisForm form, double j,
                                     int level) {
  if (level < 0 || level >= static_cast<int>(sol.bound_masses.size()))
    throw std::invalid_argument("build_dynamical_irrep: no such bound state");
  return DynamicalIrrep{sol.bound_masses[static_cast<std::size_t>(level)], j, form};
}

}  // namespace piqm
