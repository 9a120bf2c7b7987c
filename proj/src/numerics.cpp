#include "piqm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace piqm {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

double QuadratureGrid::x_of_k(double k) const {
  switch (mapping) {
    case GridMapping::rational:
      return (k - scale) / (k + scale);
    case GridMapping::tangent:
      return 4.0 / M_PI * std::atan(k / scale) - 1.0;
  }
  return 0.0;
}

QuadratureGrid make_grid(int n, double scale, GridMapping mapping) {
  if (n < 2) throw std::invalid_argument("make_grid: need at least 2 nodes");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("make_grid: scale must be positive and finite");

  std::vector<double> x, w;
  gauss_legendre(n, x, w);

  QuadratureGrid g;
  g.mapping = mapping;
  g.scale = scale;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    switch (mapping) {
      case GridMapping::rational: {
        g.nodes[i] = scale * (1.0 + x[i]) / (1.0 - x[i]);
        g.weights[i] = w[i] * 2.0 * scale / ((1.0 - x[i]) * (1.0 - x[i]));
        break;
      }
      case GridMapping::tangent: {
        const double t = M_PI * (1.0 + x[i]) / 4.0;
        g.nodes[i] = scale * std::tan(t);
        const double c = std::cos(t);
        g.weights[i] = w[i] * scale * M_PI / (4.0 * c * c);
        break;
      }
    }
  }
  std::ostringstream d;
  d << (mapping == GridMapping::rational ? "rational" : "tangent") << "(n=" << n
    << ",scale=" << scale << ")";
  g.descriptor = d.str();
  return g;
}

QuadratureGrid make_grid_capped(int n, double scale, double k_cap, GridMapping mapping) {
  if (n < 2) throw std::invalid_argument("make_grid_capped: need at least 2 nodes");
  if (!(scale > 0.0) || !(k_cap > scale))
    throw std::invalid_argument("make_grid_capped: need 0 < scale < k_cap");

  std::vector<double> t, w;
  gauss_legendre(n, t, w);

  QuadratureGrid g;
  g.mapping = mapping;
  g.scale = scale;
  g.cap = k_cap;
  g.nodes.resize(n);
  g.weights.resize(n);
  QuadratureGrid probe;
  probe.mapping = mapping;
  probe.scale = scale;
  const double x_cap = probe.x_of_k(k_cap);
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 0.5 * (x_cap + 1.0) * (t[i] + 1.0);
    const double wx = w[i] * 0.5 * (x_cap + 1.0);
    switch (mapping) {
      case GridMapping::rational:
        g.nodes[i] = scale * (1.0 + x) / (1.0 - x);
        g.weights[i] = wx * 2.0 * scale / ((1.0 - x) * (1.0 - x));
        break;
      case GridMapping::tangent: {
        const double th = M_PI * (1.0 + x) / 4.0;
        const double c = std::cos(th);
        g.nodes[i] = scale * std::tan(th);
        g.weights[i] = wx * scale * M_PI / (4.0 * c * c);
        break;
      }
    }
  }
  std::ostringstream d;
  d << (mapping == GridMapping::rational ? "rational" : "tangent") << "(n=" << n
    << ",scale=" << scale << ",cap=" << k_cap << ")";
  g.descriptor = d.str();
  return g;
}

BarycentricInterp::BarycentricInterp(const QuadratureGrid& grid) : grid_(&grid) {
  const int n = grid.size();
  x_.resize(n);
  lam_.resize(n);
  for (int j = 0; j < n; ++j) x_[j] = grid.x_of_k(grid.nodes[j]);
  // generic weights lam_j = 1/prod_{i!=j}(x_j - x_i), computed through logs
  // to dodge under/overflow and normalized by the largest magnitude
  std::vector<double> lg(n, 0.0);
  std::vector<int> sign(n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const double d = x_[j] - x_[i];
      lg[j] -= std::log(std::abs(d));
      if (d < 0.0) sign[j] = -sign[j];
    }
  const double lmax = *std::max_element(lg.begin(), lg.end());
  for (int j = 0; j < n; ++j) lam_[j] = sign[j] * std::exp(lg[j] - lmax);
}

void BarycentricInterp::weights(double k, std::vector<double>& c) const {
  const int n = static_cast<int>(x_.size());
  c.assign(n, 0.0);
  const double x = grid_->x_of_k(k);
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = x - x_[j];
    if (std::abs(d) < 1e-14 * (1.0 + std::abs(x))) {
      c.assign(n, 0.0);
      c[j] = 1.0;
      return;
    }
    c[j] = lam_[j] / d;
    denom += c[j];
  }
  for (int j = 0; j < n; ++j) c[j] /= denom;
}

double BarycentricInterp::eval(double k, const Eigen::VectorXd& f) const {
  std::vector<double> c;
  weights(k, c);
  double s = 0.0;
  for (int j = 0; j < static_cast<int>(c.size()); ++j) s += c[j] * f[j];
  return s;
}

int lagrange4_weights(const std::vector<double>& nodes, double k, double w[4]) {
  const int n = static_cast<int>(nodes.size());
  if (n < 4) throw std::invalid_argument("lagrange4_weights: need >= 4 nodes");
  // locate the first node >= k
  int hi = static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), k) - nodes.begin());
  int i0 = hi - 2;
  if (i0 < 0) i0 = 0;
  if (i0 > n - 4) i0 = n - 4;
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      p *= (k - nodes[i0 + b]) / (nodes[i0 + a] - nodes[i0 + b]);
    }
    w[a] = p;
  }
  return i0;
}

double hermiticity_defect(const Eigen::MatrixXd& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

EigenSolution symmetric_eigensolve(const DenseOperator& op) {
  if (!op.hermitian)
    throw std::invalid_argument("symmetric_eigensolve: hermitian flag not set");
  if (op.matrix.rows() != op.matrix.cols())
    throw std::invalid_argument("symmetric_eigensolve: matrix not square");
  const double scale = std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
  if (hermiticity_defect(op.matrix) > 1e-12 * scale)
    throw std::invalid_argument("symmetric_eigensolve: matrix violates hermitian contract");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (op.matrix + op.matrix.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric_eigensolve: decomposition failed");
  EigenSolution sol;
  sol.values = es.eigenvalues();
  sol.vectors = es.eigenvectors();
  return sol;
}

DominantEig largest_eigenvalue(const Eigen::MatrixXd& a, int max_iter, double tol) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("largest_eigenvalue: matrix not square");
  const int n = static_cast<int>(a.rows());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

  // Deterministic start with components on every coordinate.
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 / (1.0 + i);
  v.normalize();

  double lambda = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::VectorXd w = a * v;
    const double nw = w.norm();
    if (nw == 0.0) return {0.0, v.cast<std::complex<double>>(), it};
    lambda = v.dot(w);
    const double resid = (w - lambda * v).norm();
    v = w / nw;
    if (resid < tol * scale) {
      // refresh the Rayleigh quotient on the converged vector
      Eigen::VectorXd av = a * v;
      lambda = v.dot(av);
      return {lambda, v.cast<std::complex<double>>(), it + 1};
    }
  }

  // No magnitude gap (for example complex conjugate pairs): dense fallback.
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("largest_eigenvalue: no convergence after " +
                             std::to_string(max_iter) + " power iterations and QR failed");
  }
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[best])) best = i;
  DominantEig out;
  out.value = es.eigenvalues()[best];
  out.vector = es.eigenvectors().col(best);
  out.iterations = max_iter;
  const double resid = (a.cast<std::complex<double>>() * out.vector - out.value * out.vector).norm();
  if (resid > 1e-8 * scale)
    throw std::runtime_error("largest_eigenvalue: residual " + std::to_string(resid) +
                             " after dense fallback");
  return out;
}

}  // namespace piqm
