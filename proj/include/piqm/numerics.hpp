#ifndef PIQM_NUMERICS_HPP
#define PIQM_NUMERICS_HPP

// Quadrature grids, interpolation and dense linear-algebra helpers shared by
// the solver modules.  Units are MeV throughout (hbar = c = 1).

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace piqm {

// Deterministic splitmix64 generator.  Used for every seeded sample set in
// the library and test suites so results are reproducible across platforms
// (std::uniform_real_distribution is implementation defined).
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Gauss-Legendre rule on (-1,1), nodes ascending.  Exact for polynomials of
// degree <= 2n-1.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

enum class GridMapping { rational, tangent };

// Momentum grid on (0,inf) obtained by mapping Gauss-Legendre nodes.
//   rational:  k = s (1+x)/(1-x)
//   tangent:   k = s tan(pi (1+x)/4)
struct QuadratureGrid {
  std::vector<double> nodes;    // strictly increasing, positive
  std::vector<double> weights;  // positive
  GridMapping mapping = GridMapping::rational;
  double scale = 1.0;
  double cap = 0.0;  // momentum cutoff for capped grids, 0 when covering [0,inf)
  std::string descriptor;

  int size() const { return static_cast<int>(nodes.size()); }
  bool capped() const { return cap > 0.0; }

  // Inverse of the node map, x(k) in (-1,1).  Valid for any k > 0, which is
  // what makes global interpolation on this grid usable at arbitrary momenta.
  double x_of_k(double k) const;

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

QuadratureGrid make_grid(int n, double scale, GridMapping mapping = GridMapping::rational);

// Grid truncated at k_cap: the same node map restricted to (0, k_cap).  Used
// by the dense diagonalization oracles, where the open-ended tail of the
// full map carries no physics but destabilizes interpolated operator blocks.
QuadratureGrid make_grid_capped(int n, double scale, double k_cap,
                                GridMapping mapping = GridMapping::rational);

// Barycentric Lagrange interpolation through all grid nodes, carried out in
// the mapped variable x.  Spectrally accurate for kernels analytic in k.
class BarycentricInterp {
 public:
  explicit BarycentricInterp(const QuadratureGrid& grid);

  // Interpolation weights c_j at momentum k: f(k) ~ sum_j c_j f(k_j).
  // Exact (delta) when k hits a node.
  void weights(double k, std::vector<double>& c) const;

  double eval(double k, const Eigen::VectorXd& f) const;

 private:
  const QuadratureGrid* grid_;
  std::vector<double> x_;    // mapped nodes
  std::vector<double> lam_;  // barycentric weights
};

// Local cubic (4-point Lagrange) interpolation weights on an ascending node
// set.  Returns the first stencil index; w has length 4.
int lagrange4_weights(const std::vector<double>& nodes, double k, double w[4]);

// Dense operator with attached grid bookkeeping.
struct DenseOperator {
  Eigen::MatrixXd matrix;
  bool hermitian = false;
  std::string row_grid;
  std::string col_grid;
};

// max |A - A^T|, used to enforce the hermitian contract.
double hermiticity_defect(const Eigen::MatrixXd& a);

struct EigenSolution {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

// Eigendecomposition of a symmetric operator.  Throws std::invalid_argument
// if the hermitian flag is unset or the matrix violates it.
EigenSolution symmetric_eigensolve(const DenseOperator& op);

struct DominantEig {
  std::complex<double> value;
  Eigen::VectorXcd vector;
  int iterations = 0;
};

// Dominant (largest-magnitude) eigenvalue of a square real matrix.  Power
// iteration with a deterministic start vector; falls back to a dense QR solve
// when the spectrum has no magnitude gap.  Throws std::runtime_error with the
// iteration count if neither converges.
DominantEig largest_eigenvalue(const Eigen::MatrixXd& a, int max_iter = 2000,
                               double tol = 1e-11);

}  // namespace piqm

#endif
