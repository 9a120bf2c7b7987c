#include "piqm/irreps.hpp"

#include <cmath>
#include <stdexcept>

namespace piqm {

FourVector coords_to_momentum(BasisForm form, double m, const Eigen::Vector3d& c) {
  if (!(m > 0.0)) throw std::domain_error("coords_to_momentum: mass must be positive");
  switch (form) {
    case BasisForm::instant:
      return onshell(m, c);
    case BasisForm::point:
      return onshell(m, m * c);
    case BasisForm::front:
      return onshell_front(m, c[0], {c[1], c[2]});
  }
  throw std::logic_error("coords_to_momentum: bad form");
}

Eigen::Vector3d momentum_to_coords(BasisForm form, double m, const FourVector& p) {
  switch (form) {
    case BasisForm::instant:
      return p.r;
    case BasisForm::point:
      return p.r / m;
    case BasisForm::front:
      return {p.plus(), p.r[0], p.r[1]};
  }
  throw std::logic_error("momentum_to_coords: bad form");
}

WignerFunctionValue wigner_function(BasisForm form, double m, double j,
                                    const LorentzTransform& lam, const FourVector& a,
                                    const Eigen::Vector3d& source) {
  const FourVector p = coords_to_momentum(form, m, source);
  const FourVector q = lam.apply(p);

  WignerFunctionValue out;
  out.target = momentum_to_coords(form, m, q);

  double jac = 0.0;
  SU2Element rw;
  switch (form) {
    case BasisForm::instant:
    case BasisForm::point:
      // instant: sqrt(omega/omega'); point: sqrt(v0/v0'), the same ratio
      jac = std::sqrt(q.t / p.t);
      rw = wigner_rotation(lam, p, SpinKind::canonical);
      break;
    case BasisForm::front:
      jac = std::sqrt(q.plus() / p.plus());
      rw = wigner_rotation(lam, p, SpinKind::lightfront);
      break;
  }
  out.weight = jac * std::exp(complexd(0.0, 1.0) * q.dot(a));
  out.spin_matrix = wigner_d(j, rw);
  return out;
}

BasisChange basis_change(BasisForm from, BasisForm to, double m, double j,
                         const Eigen::Vector3d& source, double mu) {
  if (from == to) throw std::invalid_argument("basis_change: forms must differ");
  const int dim = static_cast<int>(std::lround(2.0 * j)) + 1;
  const int imu = mu_index(j, mu);
  if (imu < 0 || imu >= dim) throw std::invalid_argument("basis_change: invalid projection");

  const FourVector p = coords_to_momentum(from, m, source);
  BasisChange out;
  out.target = momentum_to_coords(to, m, p);
  out.coeff = Eigen::VectorXcd::Zero(dim);

  const double w = p.t;
  const double pp = p.plus();

  // scalar factor and mixing matrix for each ordered pair; front<->point go
  // through the instant form, so factors multiply
  if (from == BasisForm::point && to == BasisForm::instant) {
    out.coeff[imu] = std::pow(m, 1.5);
  } else if (from == BasisForm::instant && to == BasisForm::point) {
    out.coeff[imu] = std::pow(m, -1.5);
  } else if (from == BasisForm::front && to == BasisForm::instant) {
    const Eigen::MatrixXcd d = wigner_d(j, melosh_rotation(m, p.r));
    out.coeff = std::sqrt(w / pp) * d.col(imu);
  } else if (from == BasisForm::instant && to == BasisForm::front) {
    const Eigen::MatrixXcd d = wigner_d(j, melosh_rotation(m, p.r));
    out.coeff = std::sqrt(pp / w) * d.row(imu).conjugate().transpose();
  } else if (from == BasisForm::front && to == BasisForm::point) {
    const Eigen::MatrixXcd d = wigner_d(j, melosh_rotation(m, p.r));
    out.coeff = std::sqrt(w / pp) * std::pow(m, -1.5) * d.col(imu);
  } else if (from == BasisForm::point && to == BasisForm::front) {
    const Eigen::MatrixXcd d = wigner_d(j, melosh_rotation(m, p.r));
    out.coeff = std::sqrt(pp / w) * std::pow(m, 1.5) * d.row(imu).conjugate().transpose();
  }
  return out;
}

bool kinematic_subgroup_check(BasisForm form, const LorentzTransform& lam,
                              const FourVector& a, std::pair<double, double> masses,
                              const std::vector<Eigen::Vector3d>& samples, double j,
                              double tol) {
  const auto [m1, m2] = masses;
  if (!(m1 > 0.0) || !(m2 > 0.0) || m1 == m2)
    throw std::invalid_argument("kinematic_subgroup_check: masses must be positive and distinct");
  for (const auto& s : samples) {
    const WignerFunctionValue a1 = wigner_function(form, m1, j, lam, a, s);
    const WignerFunctionValue a2 = wigner_function(form, m2, j, lam, a, s);
    const double scale = std::max(1.0, a1.target.norm());
    if ((a1.target - a2.target).norm() > tol * scale) return false;
    if (std::abs(a1.weight - a2.weight) > tol) return false;
    if ((a1.spin_matrix - a2.spin_matrix).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

LorentzTransform sample_lorentz(SplitMix64& rng, double max_rapidity) {
  const SU2Element u = SU2Element::random(rng.state);
  const double eta = rng.uniform(-max_rapidity, max_rapidity);
  const double ct = rng.uniform(-1.0, 1.0);
  const double ph = rng.uniform(0.0, 2.0 * M_PI);
  const double st = std::sqrt(1.0 - ct * ct);
  const Vector3d dir(st * std::cos(ph), st * std::sin(ph), ct);
  const LorentzTransform b = boost_canonical(1.0, std::sinh(eta) * dir);
  return b * LorentzTransform::rotation(u);
}

GroupElement sample_group_element(BasisForm form, bool inside, SplitMix64& rng,
                                  double scale) {
  GroupElement g;
  const double ainv = 1.0 / scale;  // translation magnitude giving O(1) phases

  auto random_spatial = [&](double lo, double hi) {
    Vector3d v;
    for (int i = 0; i < 3; ++i) {
      const double s = rng.uniform(lo, hi);
      v[i] = (rng.next() & 1ull) ? s : -s;
    }
    return v;
  };

  switch (form) {
    case BasisForm::instant: {
      g.lam = LorentzTransform::rotation(SU2Element::random(rng.state));
      g.a = FourVector(0.0, random_spatial(0.0, 2.0 * ainv));
      if (!inside) {
        const int mode = static_cast<int>(rng.next() % 3);
        if (mode == 0 || mode == 2) {
          const double eta = rng.uniform(0.3, 1.5) * ((rng.next() & 1ull) ? 1.0 : -1.0);
          const double ct = rng.uniform(-1.0, 1.0);
          const double ph = rng.uniform(0.0, 2.0 * M_PI);
          const double st = std::sqrt(1.0 - ct * ct);
          const Vector3d dir(st * std::cos(ph), st * std::sin(ph), ct);
          g.lam = boost_canonical(1.0, std::sinh(eta) * dir) * g.lam;
        }
        if (mode == 1 || mode == 2)
          g.a.t = rng.uniform(0.5, 2.0) * ainv * ((rng.next() & 1ull) ? 1.0 : -1.0);
      }
      break;
    }
    case BasisForm::point: {
      g.lam = sample_lorentz(rng);
      g.a = FourVector();
      if (!inside) {
        g.a = FourVector(rng.uniform(0.5, 2.0) * ainv * ((rng.next() & 1ull) ? 1.0 : -1.0),
                         random_spatial(0.5 * ainv, 2.0 * ainv));
      }
      break;
    }
    case BasisForm::front: {
      // light-front preserving: front boosts x z-rotations, translations with a+ = 0
      const double pplus = rng.uniform(0.4, 2.5);
      const Eigen::Vector2d pperp(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      g.lam = boost_lightfront(1.0, pplus, pperp) *
              LorentzTransform::rotation_axis_angle(Vector3d(0, 0, 1), theta);
      const double aminus = rng.uniform(-2.0, 2.0) * ainv;
      const Eigen::Vector2d aperp(rng.uniform(-2.0, 2.0) * ainv, rng.uniform(-2.0, 2.0) * ainv);
      // a+ = a0+a3 = 0
      g.a = FourVector(0.5 * aminus, Vector3d(aperp[0], aperp[1], -0.5 * aminus));
      if (!inside) {
        const int mode = static_cast<int>(rng.next() % 3);
        if (mode == 0 || mode == 2) {
          const double ang = rng.uniform(0.3, 1.2) * ((rng.next() & 1ull) ? 1.0 : -1.0);
          const Vector3d axis = (rng.next() & 1ull) ? Vector3d(1, 0, 0) : Vector3d(0, 1, 0);
          g.lam = LorentzTransform::rotation_axis_angle(axis, ang) * g.lam;
        }
        if (mode == 1 || mode == 2) {
          const double aplus =
              rng.uniform(0.5, 2.0) * ainv * ((rng.next() & 1ull) ? 1.0 : -1.0);
          g.a.t += 0.5 * aplus;
          g.a.r[2] += 0.5 * aplus;
        }
      }
      break;
    }
  }
  return g;
}

}  // namespace piqm
