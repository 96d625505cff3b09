#include "cgolab/carleman.hpp"

#include <cmath>
#include <stdexcept>

namespace cgolab {

namespace {

// nodes within two stencil layers of the boundary (index distance <= 2)
bool near_boundary(const Domain& dom, Eigen::Index f) {
  const Eigen::VectorXi idx = dom.multi(f);
  const int n = dom.points_per_axis();
  for (int k = 0; k < dom.dim(); ++k)
    if (idx[k] <= 2 || idx[k] >= n - 3) return true;
  return false;
}

}  // namespace

InteriorEstimate interior_estimate_ratio(const Domain& dom, const CarlemanWeight& w,
                                         const Potential& q, double h, const RealField& u) {
  if (u.size() != dom.num_nodes())
    throw std::invalid_argument("interior_estimate_ratio: field size mismatch");
  double umax = linf_norm(u);
  if (!(umax > 0.0)) throw std::invalid_argument("interior_estimate_ratio: u vanishes identically");
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f)
    if (near_boundary(dom, f) && std::abs(u[f]) > 1e-13 * umax)
      throw std::invalid_argument("interior_estimate_ratio: u is not interior-supported");
  if (h * q.max_norm > 0.5)
    throw std::invalid_argument("interior_estimate_ratio: h*||q||_inf exceeds the smallness bound");

  const auto grad_u = gradient(dom, u);
  const RealField lap_u = laplacian(dom, u);
  double nw = 0.0, ndw = 0.0, nrhs = 0.0;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const double vw = dom.volume_weight(f);
    const Eigen::VectorXd x = dom.point(f);
    const double e = std::exp(w.value(x) / h);
    const Eigen::VectorXd g = w.grad(x);
    nw += vw * e * e * u[f] * u[f];
    double d2 = 0.0;
    for (int k = 0; k < dom.dim(); ++k) {
      const double comp = h * grad_u[k][f] + g[k] * u[f];
      d2 += comp * comp;
    }
    ndw += vw * e * e * d2;
    const double pu = h * h * (-lap_u[f] + q.values[f] * u[f]);
    nrhs += vw * e * e * pu * pu;
  }
  InteriorEstimate est;
  est.h = h;
  est.lhs = h * (std::sqrt(nw) + std::sqrt(ndw));
  est.rhs = std::sqrt(nrhs);
  if (!(est.rhs > 0.0)) throw std::invalid_argument("interior_estimate_ratio: zero right-hand side");
  est.ratio = est.lhs / est.rhs;
  return est;
}

BoundaryEstimate boundary_estimate_ratio(const Domain& dom, const CarlemanWeight& w,
                                         const Potential& q, double h, const RealField& u) {
  if (u.size() != dom.num_nodes())
    throw std::invalid_argument("boundary_estimate_ratio: field size mismatch");
  const double umax = linf_norm(u);
  if (!(umax > 0.0)) throw std::invalid_argument("boundary_estimate_ratio: u vanishes identically");
  for (const auto& bn : dom.boundary())
    if (std::abs(u[bn.node]) > 1e-13 * umax)
      throw std::invalid_argument("boundary_estimate_ratio: nonzero boundary trace");

  const auto grad_u = gradient(dom, u);
  const RealField lap_u = laplacian(dom, u);
  const RealField flux = normal_derivative(dom, u);

  BoundaryEstimate est;
  est.h = h;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const double vw = dom.volume_weight(f);
    const Eigen::VectorXd x = dom.point(f);
    const double e2 = std::exp(2.0 * w.value(x) / h);
    double g2 = 0.0;
    for (int k = 0; k < dom.dim(); ++k) g2 += grad_u[k][f] * grad_u[k][f];
    est.interior_sq += vw * e2 * (u[f] * u[f] + h * h * g2);
    if (dom.is_interior(f)) {
      const double pu = h * h * (-lap_u[f] + q.values[f] * u[f]);
      est.volume_sq += vw * e2 * pu * pu;
    }
  }
  const auto& bnodes = dom.boundary();
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const Eigen::VectorXd x = dom.point(bnodes[b].node);
    const double sgn = bnodes[b].normal.dot(w.grad(x));
    const double e2 = std::exp(2.0 * w.value(x) / h);
    const double t = bnodes[b].weight * sgn * e2 * flux[b] * flux[b];
    if (sgn < 0.0)
      est.flux_minus -= t;  // nonnegative
    else
      est.flux_plus += t;
  }
  const double h3 = h * h * h;
  const double lhs_mass = h3 * est.flux_minus + h * h * est.interior_sq;
  if (est.flux_plus > 0.0) {
    // smallest positive root of C0^2 h^3 Bp + C0 V - lhs_mass >= 0
    est.c0 = (-est.volume_sq +
              std::sqrt(est.volume_sq * est.volume_sq + 4.0 * h3 * est.flux_plus * lhs_mass)) /
             (2.0 * h3 * est.flux_plus);
  } else {
    est.c0 = lhs_mass / est.volume_sq;
  }
  return est;
}

EstimateReport constant_sweep(const Domain& dom, const CarlemanWeight& w, const Potential& q,
                              const std::vector<double>& h_list,
                              const std::vector<RealField>& test_fields) {
  if (h_list.size() < 3) throw std::invalid_argument("constant_sweep: need at least 3 h values");
  if (test_fields.size() < 10)
    throw std::invalid_argument("constant_sweep: need at least 10 test fields");
  EstimateReport rep;
  rep.test_count = static_cast<int>(test_fields.size());
  for (double h : h_list) {
    double worst = 0.0;
    int arg = -1;
    for (std::size_t t = 0; t < test_fields.size(); ++t) {
      const InteriorEstimate est = interior_estimate_ratio(dom, w, q, h, test_fields[t]);
      if (est.ratio > worst) {
        worst = est.ratio;
        arg = static_cast<int>(t);
      }
    }
    rep.h_values.push_back(h);
    rep.constants.push_back(worst);
    rep.argmax_test.push_back(arg);
  }
  for (std::size_t i = 0; i + 1 < rep.constants.size(); ++i) {
    const double hr = rep.h_values[i + 1] / rep.h_values[i];
    if (hr > 0.45 && hr < 0.55 && rep.constants[i + 1] > 2.0 * rep.constants[i])
      rep.growth_flag = true;
  }
  return rep;
}

std::vector<RealField> bump_test_family(const Domain& dom, int count, Rng& rng, double rho_min,
                                        double rho_max) {
  std::vector<RealField> fields;
  fields.reserve(count);
  const double guard = 3.5 * dom.max_spacing();
  for (int i = 0; i < count; ++i) {
    double rho = rng.uniform(rho_min, rho_max);
    Eigen::VectorXd c(dom.dim());
    bool ok = true;
    for (int k = 0; k < dom.dim(); ++k) {
      const double a = dom.lo()[k] + rho + guard;
      const double b = dom.hi()[k] - rho - guard;
      if (!(b >= a)) {
        ok = false;
        break;
      }
      c[k] = rng.uniform(a, b);
    }
    if (!ok) {
      rho = 0.5 * (dom.hi() - dom.lo()).minCoeff() - guard - dom.max_spacing();
      c = 0.5 * (dom.lo() + dom.hi());
    }
    RealField u = evaluate_on_grid(
        dom, [&](const Eigen::VectorXd& x) { return bump_profile((x - c).norm() / rho); });
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const Eigen::VectorXi idx = dom.multi(f);
      for (int k = 0; k < dom.dim(); ++k)
        if (idx[k] <= 2 || idx[k] >= dom.points_per_axis() - 3) u[f] = 0.0;
    }
    fields.push_back(std::move(u));
  }
  return fields;
}

RealField dirichlet_eigenfunction(const Domain& dom, const Eigen::VectorXi& modes) {
  RealField u = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) {
    double v = 1.0;
    for (int k = 0; k < dom.dim(); ++k) {
      const double L = dom.hi()[k] - dom.lo()[k];
      v *= std::sin(modes[k] * M_PI * (x[k] - dom.lo()[k]) / L);
    }
    return v;
  });
  for (const auto& bn : dom.boundary()) u[bn.node] = 0.0;
  return u;
}

}  // namespace cgolab
