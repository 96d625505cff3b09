#include "cgolab/cgo.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "cgolab/rng.hpp"

namespace cgolab {

namespace {

// d/dtheta and d2/dtheta2 of a(theta) = (sin theta)^{-m/2} e^{i s m theta/2},
// s = sigma*tau, m = n-2
struct AmpDerivs {
  cd a, a1, a2;
};

AmpDerivs amp_derivs(double theta, int m, int s) {
  const double st = std::sin(theta);
  const cd a = std::pow(st, -0.5 * m) * std::exp(cd(0.0, 0.5 * s * m * theta));
  const cd logd = cd(-0.5 * m * (std::cos(theta) / st), 0.5 * s * m);
  const cd a1 = a * logd;
  const cd a2 = a1 * logd + a * cd(0.5 * m / (st * st), 0.0);
  return {a, a1, a2};
}

}  // namespace

cd LogSpherePhase::amplitude(const Eigen::VectorXd& x, int sigma, int tau) const {
  const double th = psi_angle(fam_, x);
  return amp_derivs(th, dim() - 2, sigma * tau).a;
}

Eigen::VectorXcd LogSpherePhase::amplitude_grad(const Eigen::VectorXd& x, int sigma, int tau) const {
  const double th = psi_angle(fam_, x);
  const AmpDerivs d = amp_derivs(th, dim() - 2, sigma * tau);
  const Eigen::VectorXd gth = eval_psi(fam_, x).second;  // grad of the raw angle
  return d.a1 * gth.cast<cd>();
}

cd LogSpherePhase::amplitude_lap(const Eigen::VectorXd& x, int sigma, int tau) const {
  const double th = psi_angle(fam_, x);
  const AmpDerivs d = amp_derivs(th, dim() - 2, sigma * tau);
  const double r2 = (x - fam_.xtilde).squaredNorm();
  const double lap_th = psi_laplacian(fam_, x);
  // |grad theta|^2 = 1/r^2
  return d.a2 / r2 + d.a1 * lap_th;
}

LinearPhase::LinearPhase(Eigen::VectorXd alpha, Eigen::VectorXd beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (std::abs(alpha_.norm() - beta_.norm()) > 1e-12 * alpha_.norm())
    throw std::invalid_argument("LinearPhase: |alpha| must equal |beta|");
  if (std::abs(alpha_.dot(beta_)) > 1e-12 * alpha_.squaredNorm())
    throw std::invalid_argument("LinearPhase: alpha and beta must be orthogonal");
}

ComplexField transport_apply(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                             const ComplexField& a) {
  const auto grad_a = gradient(dom, a);
  ComplexField out(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = phase.phi_grad(x);
    const Eigen::VectorXd gpsi = phase.psi_grad(x);
    cd dir(0.0, 0.0);
    for (int k = 0; k < dom.dim(); ++k)
      dir += (cd(sigma * gphi[k], tau * gpsi[k])) * grad_a[k][f];
    const cd zer = cd(sigma * phase.phi_lap(x), tau * phase.psi_lap(x)) * a[f];
    out[f] = -(2.0 * dir + zer);
  }
  return out;
}

cd transport_residual_analytic(const PhasePair& phase, const Eigen::VectorXd& x, int sigma,
                               int tau) {
  const Eigen::VectorXd gphi = phase.phi_grad(x);
  const Eigen::VectorXd gpsi = phase.psi_grad(x);
  const Eigen::VectorXcd ga = phase.amplitude_grad(x, sigma, tau);
  cd dir(0.0, 0.0);
  for (int k = 0; k < gphi.size(); ++k) dir += cd(sigma * gphi[k], tau * gpsi[k]) * ga[k];
  const cd zer = cd(sigma * phase.phi_lap(x), tau * phase.psi_lap(x)) * phase.amplitude(x, sigma, tau);
  return -(2.0 * dir + zer);
}

ComplexField amplitude_field(const Domain& dom, const PhasePair& phase, int sigma, int tau) {
  ComplexField a(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) a[f] = phase.amplitude(dom.point(f), sigma, tau);
  return a;
}

WkbReport wkb_residual(const Domain& dom, const PhasePair& phase, int sigma, int tau, double h,
                       const Potential& q, const ComplexField* a_in) {
  const ComplexField a = a_in ? *a_in : amplitude_field(dom, phase, sigma, tau);
  const ComplexField La = transport_apply(dom, phase, sigma, tau, a);
  const ComplexField lap_a = laplacian(dom, a);
  ComplexField res = ComplexField::Zero(dom.num_nodes());
  for (const Eigen::Index f : dom.interior_nodes())
    res[f] = h * La[f] + h * h * (cd(q.values[f], 0.0) * a[f] - lap_a[f]);
  WkbReport rep;
  rep.h = h;
  rep.raw_norm = l2_interior(dom, res);
  rep.norm_ratio = rep.raw_norm / (h * h);
  return rep;
}

ComplexField conjugated_apply(const Domain& dom, const PhasePair& phase, int sigma, double h,
                              const RealField& q, const ComplexField& w) {
  const auto grad_w = gradient(dom, w);
  const ComplexField lap_w = laplacian(dom, w);
  ComplexField out = ComplexField::Zero(dom.num_nodes());
  for (const Eigen::Index f : dom.interior_nodes()) {
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = phase.phi_grad(x);
    cd adv(0.0, 0.0);
    for (int k = 0; k < dom.dim(); ++k) adv += cd(gphi[k], 0.0) * grad_w[k][f];
    out[f] = -h * h * lap_w[f] - 2.0 * h * sigma * adv -
             (gphi.squaredNorm() + h * sigma * phase.phi_lap(x) - h * h * q[f]) * w[f];
  }
  return out;
}

ComplexField full_conjugated_apply(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                                   double h, const RealField& q, const ComplexField& r) {
  const auto grad_r = gradient(dom, r);
  const ComplexField lap_r = laplacian(dom, r);
  ComplexField out = ComplexField::Zero(dom.num_nodes());
  for (const Eigen::Index f : dom.interior_nodes()) {
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = phase.phi_grad(x);
    const Eigen::VectorXd gpsi = phase.psi_grad(x);
    cd adv(0.0, 0.0);
    for (int k = 0; k < dom.dim(); ++k)
      adv += cd(sigma * gphi[k], tau * gpsi[k]) * grad_r[k][f];
    const cd zer(sigma * phase.phi_lap(x), tau * phase.psi_lap(x));
    out[f] = -h * h * lap_r[f] - 2.0 * h * adv - h * zer * r[f] + h * h * q[f] * r[f];
  }
  return out;
}

namespace {

// sparse matrix of full_conjugated_apply restricted to interior x interior:
// e^{-Phi} P e^{Phi} with Phi = (sigma phi + i tau psi)/h expanded in analytic
// Phi-derivatives (the eikonal pair cancels (grad Phi)^2 exactly)
Eigen::SparseMatrix<cd> conjugated_matrix(const Domain& dom, const PhasePair& phase, int sigma,
                                          int tau, double h, const RealField& q) {
  const auto& interior = dom.interior_nodes();
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  const int n = dom.points_per_axis();
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(ni * (2 * dom.dim() + 1));
  for (Eigen::Index ii = 0; ii < ni; ++ii) {
    const Eigen::Index f = interior[ii];
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = phase.phi_grad(x);
    const Eigen::VectorXd gpsi = phase.psi_grad(x);
    cd diag = -h * cd(sigma * phase.phi_lap(x), tau * phase.psi_lap(x)) + h * h * q[f];
    for (int axis = 0; axis < dom.dim(); ++axis) {
      const double dx = dom.spacing()[axis];
      const double inv_d2 = 1.0 / (dx * dx);
      Eigen::Index stride = 1;
      for (int k = dom.dim() - 1; k > axis; --k) stride *= n;
      diag += cd(2.0 * h * h * inv_d2, 0.0);
      const cd off_lap(-h * h * inv_d2, 0.0);
      const cd adv = -2.0 * h * cd(sigma * gphi[axis], tau * gpsi[axis]) / (2.0 * dx);
      const Eigen::Index jm = dom.interior_pos(f - stride);
      const Eigen::Index jp = dom.interior_pos(f + stride);
      if (jm >= 0) trip.emplace_back(ii, jm, off_lap - adv);
      if (jp >= 0) trip.emplace_back(ii, jp, off_lap + adv);
    }
    trip.emplace_back(ii, ii, diag);
  }
  Eigen::SparseMatrix<cd> M(ni, ni);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

}  // namespace

RemainderResult solve_remainder(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                                double h, const ComplexField& rhs, const RealField& q,
                                RemainderTrace trace) {
  if (!(h > 0.0)) throw std::invalid_argument("solve_remainder: h must be positive");
  const auto& interior = dom.interior_nodes();
  const auto& bnodes = dom.boundary();
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  const int n = dom.points_per_axis();
  const int d = dom.dim();

  // Pinning the whole boundary would force an exponentially amplified
  // homogeneous component for small h, so at most the sigma*(phi'.nu) <= 0
  // side is constrained.
  std::vector<Eigen::Index> col_of(dom.num_nodes(), -1);
  Eigen::Index ncols = 0;
  for (Eigen::Index ii = 0; ii < ni; ++ii) col_of[interior[ii]] = ncols++;
  for (const auto& bn : bnodes) {
    const double s = sigma * bn.normal.dot(phase.phi_grad(dom.point(bn.node)));
    if (trace == RemainderTrace::Free || s > 0.0) col_of[bn.node] = ncols++;
  }

  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(ni * (2 * d + 1));
  ComplexField rhs_i(ni);
  for (Eigen::Index ii = 0; ii < ni; ++ii) {
    const Eigen::Index f = interior[ii];
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = phase.phi_grad(x);
    const Eigen::VectorXd gpsi = phase.psi_grad(x);
    cd diag = -h * cd(sigma * phase.phi_lap(x), tau * phase.psi_lap(x)) + h * h * q[f];
    for (int axis = 0; axis < d; ++axis) {
      const double dx = dom.spacing()[axis];
      const double inv_d2 = 1.0 / (dx * dx);
      Eigen::Index stride = 1;
      for (int k = d - 1; k > axis; --k) stride *= n;
      diag += cd(2.0 * h * h * inv_d2, 0.0);
      const cd off_lap(-h * h * inv_d2, 0.0);
      const cd adv = -2.0 * h * cd(sigma * gphi[axis], tau * gpsi[axis]) / (2.0 * dx);
      if (col_of[f - stride] >= 0) trip.emplace_back(ii, col_of[f - stride], off_lap - adv);
      if (col_of[f + stride] >= 0) trip.emplace_back(ii, col_of[f + stride], off_lap + adv);
    }
    trip.emplace_back(ii, col_of[f], diag);
    rhs_i[ii] = rhs[f];
  }
  Eigen::SparseMatrix<cd> A(ni, ncols);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  const Eigen::SparseMatrix<cd> AH = Eigen::SparseMatrix<cd>(A.adjoint());
  const Eigen::SparseMatrix<cd> G = A * AH;

  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  lu.compute(G);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_remainder: factorization of the conjugated system failed");

  // condition estimate: ||G||_inf times an inverse-power estimate of ||G^{-1}||
  std::vector<double> rowsum(ni, 0.0);
  for (int k = 0; k < G.outerSize(); ++k)
    for (Eigen::SparseMatrix<cd>::InnerIterator it(G, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  double norm_g = 0.0;
  for (double rs : rowsum) norm_g = std::max(norm_g, rs);
  Rng rng(0xc60ULL);
  ComplexField pv(ni);
  for (Eigen::Index i = 0; i < ni; ++i) pv[i] = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  pv /= pv.norm();
  double growth = 1.0;
  for (int it = 0; it < 8; ++it) {
    ComplexField y = lu.solve(pv);
    growth = y.norm();
    if (!(growth > 0.0) || !std::isfinite(growth))
      throw std::runtime_error("solve_remainder: singular conjugated system");
    pv = y / growth;
  }
  const double cond = norm_g * growth;
  if (cond > 1e12)
    throw std::runtime_error("solve_remainder: conjugated system ill-conditioned, estimate " +
                             std::to_string(cond));

  const ComplexField yi = lu.solve(rhs_i);
  const ComplexField z = AH * yi;

  RemainderResult out;
  out.r = ComplexField::Zero(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f)
    if (col_of[f] >= 0) out.r[f] = z[col_of[f]];
  out.w = ComplexField(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const double ps = phase.psi(dom.point(f));
    out.w[f] = out.r[f] * std::exp(cd(0.0, tau * ps / h));
  }
  out.r_l2 = l2_norm(dom, out.r);
  out.bound_constant = out.r_l2 / h;
  out.cond_estimate = cond;
  out.semiclassical_ok = h <= 1.0;
  out.grid_ok = h >= 5.0 * dom.max_spacing();
  return out;
}

ComplexField CGOSolution::field() const {
  ComplexField u(weighted.size());
  for (Eigen::Index f = 0; f < weighted.size(); ++f)
    u[f] = weighted[f] * std::exp(sigma * phi_values[f] / h);
  return u;
}

ComplexField CGOSolution::boundary_trace() const {
  const auto& bnodes = dom->boundary();
  ComplexField tr(static_cast<Eigen::Index>(bnodes.size()));
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const Eigen::Index f = bnodes[b].node;
    tr[b] = weighted[f] * std::exp(sigma * phi_values[f] / h);
  }
  return tr;
}

CGOSolution build_cgo(const Domain& dom, const PhasePair& phase, int sigma, int tau, double h,
                      const Potential& q) {
  CGOSolution sol;
  sol.dom = &dom;
  sol.h = h;
  sol.sigma = sigma;
  sol.tau = tau;
  sol.amplitude = amplitude_field(dom, phase, sigma, tau);
  sol.phi_values = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) { return phase.phi(x); });
  sol.psi_values = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) { return phase.psi(x); });

  // rhs of (sp.18): cancel the analytic conjugated residual of the amplitude
  ComplexField rhs = ComplexField::Zero(dom.num_nodes());
  for (const Eigen::Index f : dom.interior_nodes()) {
    const Eigen::VectorXd x = dom.point(f);
    rhs[f] = -(h * transport_residual_analytic(phase, x, sigma, tau) +
               h * h * (cd(q.values[f], 0.0) * phase.amplitude(x, sigma, tau) -
                        phase.amplitude_lap(x, sigma, tau)));
  }
  RemainderResult rem = solve_remainder(dom, phase, sigma, tau, h, rhs, q.values);
  sol.remainder = rem.r;
  sol.remainder_l2 = rem.r_l2;
  sol.remainder_constant = rem.bound_constant;
  sol.grid_ok = rem.grid_ok;
  sol.semiclassical_ok = rem.semiclassical_ok;

  sol.weighted = ComplexField(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const cd osc = std::exp(cd(0.0, tau * sol.psi_values[f] / h));
    sol.weighted[f] = osc * (sol.amplitude[f] + rem.r[f]);
  }
  const ComplexField res =
      full_conjugated_apply(dom, phase, sigma, tau, h, q.values, sol.amplitude + sol.remainder);
  sol.residual_rel = l2_interior(dom, res) / l2_norm(dom, sol.weighted);
  return sol;
}

}  // namespace cgolab
