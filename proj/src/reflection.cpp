#include "cgolab/reflection.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

#include "cgolab/pde.hpp"

namespace cgolab {

namespace {

// C-infinity step: 0 for t <= 0, 1 for t >= 1
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// 1 on [0, inf) shrinking... plateau: 1 for u <= 0, 0 for u >= margin
double plateau(double u, double margin) { return 1.0 - smooth_step(u / margin); }

struct FaceGeometry {
  int axis, side;
  double plane;       // coordinate of the face
  double inward_sign; // +1 when s grows with x[axis]
};

FaceGeometry face_geometry(const Domain& dom, const WMinusSpec& wm) {
  FaceGeometry fg;
  fg.axis = wm.face_axis;
  fg.side = wm.face_side;
  fg.plane = wm.face_side == 0 ? dom.lo()[wm.face_axis] : dom.hi()[wm.face_axis];
  fg.inward_sign = wm.face_side == 0 ? 1.0 : -1.0;
  return fg;
}

}  // namespace

ReflectedPhase reflected_phase(const Domain& dom, const PhaseFamily& fam, int tau,
                               const BoundaryPartition& part, double collar_width,
                               const WMinusSpec& wm) {
  if (!(collar_width > 0.0))
    throw std::invalid_argument("reflected_phase: collar_width must be positive");
  const FaceGeometry fg = face_geometry(dom, wm);
  const int n = dom.points_per_axis();
  const int d = dom.dim();
  const CarlemanWeight& w = fam.weight;

  // sign condition -d_nu phi > 0 on the face (the face must sit in dOmega_-)
  for (const auto& bn : dom.boundary()) {
    if (bn.face_axis != fg.axis || bn.face_side != fg.side) continue;
    const double s = bn.normal.dot(w.grad(dom.point(bn.node)));
    if (!(s < 0.0))
      throw std::invalid_argument(
          "reflected_phase: d_nu Im g = -d_nu phi is not positive on the chosen face");
  }
  (void)part;

  ReflectedPhase out;
  out.face_axis = fg.axis;
  out.face_side = fg.side;
  out.collar_width = collar_width;
  out.in_collar.assign(dom.num_nodes(), 0);
  out.l = ComplexField::Zero(dom.num_nodes());
  out.k = RealField::Zero(dom.num_nodes());
  out.b = ComplexField::Zero(dom.num_nodes());
  out.c_emp = std::numeric_limits<double>::infinity();
  out.c_ref = std::numeric_limits<double>::infinity();

  const Eigen::VectorXd nu_face = [&] {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v[fg.axis] = fg.side == 0 ? -1.0 : 1.0;
    return v;
  }();

  // W_minus rectangle and cutoff margins per tangential axis
  std::vector<double> half_w(d, 0.0), margin(d, 0.0), center(d, 0.0);
  for (int j = 0; j < d; ++j) {
    if (j == fg.axis) continue;
    const double L = dom.hi()[j] - dom.lo()[j];
    center[j] = 0.5 * (dom.lo()[j] + dom.hi()[j]);
    half_w[j] = 0.5 * wm.fraction * L;
    margin[j] = std::min(0.15 * L, 0.9 * (0.5 * L - half_w[j]));
    if (!(margin[j] > 0.0))
      throw std::invalid_argument("reflected_phase: W_minus is not a strict subset of the face");
  }

  const int m = dom.dim() - 2;
  auto g_val = [&](const Eigen::VectorXd& xb) {
    return cd(tau * psi_angle(fam, xb), -w.value(xb));
  };
  auto g_grad = [&](const Eigen::VectorXd& xb) {
    const Eigen::VectorXd gp = eval_psi(fam, xb).second;
    const Eigen::VectorXd gw = w.grad(xb);
    Eigen::VectorXcd g(d);
    for (int k = 0; k < d; ++k) g[k] = cd(tau * gp[k], -gw[k]);
    return g;
  };
  auto g_hess_col = [&](const Eigen::VectorXd& xb, int col) {
    const Eigen::MatrixXd hp = psi_hessian(fam, xb);
    const Eigen::MatrixXd hw = w.hess(xb);
    Eigen::VectorXcd g(d);
    for (int k = 0; k < d; ++k) g[k] = cd(tau * hp(k, col), -hw(k, col));
    return g;
  };

  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const Eigen::VectorXd x = dom.point(f);
    const double s = fg.inward_sign * (x[fg.axis] - fg.plane);
    if (s < 0.0 || s > collar_width) continue;
    out.in_collar[f] = 1;
    Eigen::VectorXd xb = x;
    xb[fg.axis] = fg.plane;

    const cd gb = g_val(xb);
    const Eigen::VectorXcd gg = g_grad(xb);
    const cd dnu_g = nu_face.cast<cd>().dot(gg);
    // c2 = -(grad_t g . grad_t(d_nu g)) / (2 d_nu g)
    const Eigen::VectorXcd hcol = g_hess_col(xb, fg.axis);  // column of Hess g along the axis
    cd num(0.0, 0.0);
    for (int j = 0; j < d; ++j) {
      if (j == fg.axis) continue;
      const cd dnj = cd(nu_face[fg.axis], 0.0) * hcol[j];  // d_t_j (d_nu g)
      num += gg[j] * dnj;
    }
    const cd c2 = -num / (2.0 * dnu_g);

    const cd l = gb + s * dnu_g + s * s * c2;
    out.l[f] = l;
    out.k[f] = l.imag() + w.value(x);
    if (s > 1e-12) out.c_emp = std::min(out.c_emp, out.k[f] / s);

    // reflected amplitude: chi * a2 at the face point, constant along nu
    double chi = 1.0;
    for (int j = 0; j < d; ++j) {
      if (j == fg.axis) continue;
      chi *= plateau(std::abs(x[j] - center[j]) - half_w[j], margin[j]);
    }
    chi *= plateau(s - 0.5 * collar_width, 0.5 * collar_width);
    const double th = psi_angle(fam, xb);
    const cd a2 = std::pow(std::sin(th), -0.5 * m) * std::exp(cd(0.0, 0.5 * tau * m * th));
    out.b[f] = chi * a2;
  }

  for (const auto& bn : dom.boundary()) {
    if (bn.face_axis != fg.axis || bn.face_side != fg.side) continue;
    const Eigen::VectorXd x = dom.point(bn.node);
    out.c_ref = std::min(out.c_ref, -bn.normal.dot(w.grad(x)));
    bool in_w = true;
    for (int j = 0; j < d; ++j) {
      if (j == fg.axis) continue;
      if (std::abs(x[j] - center[j]) > half_w[j] + 1e-12) in_w = false;
    }
    if (in_w) out.wminus_boundary.push_back(dom.boundary_pos(bn.node));
  }

  // eikonal defect |(l')^2| <= C s^2 by finite differences inside the collar
  Eigen::Index stride_axis = 1;
  for (int k = d - 1; k > fg.axis; --k) stride_axis *= n;
  double defect_c = 0.0;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    if (!out.in_collar[f]) continue;
    const Eigen::VectorXd x = dom.point(f);
    const double s = fg.inward_sign * (x[fg.axis] - fg.plane);
    if (s < dom.spacing()[fg.axis] - 1e-12 || s > collar_width - dom.spacing()[fg.axis] + 1e-12)
      continue;
    const Eigen::VectorXi idx = dom.multi(f);
    bool probe = true;
    for (int j = 0; j < d; ++j)
      if (j != fg.axis && (idx[j] < 1 || idx[j] > n - 2)) probe = false;
    if (!probe) continue;
    cd sq(0.0, 0.0);
    for (int j = 0; j < d; ++j) {
      Eigen::Index stride = 1;
      for (int k = d - 1; k > j; --k) stride *= n;
      if (!out.in_collar[f + stride] || !out.in_collar[f - stride]) {
        probe = false;
        break;
      }
      const cd dj = (out.l[f + stride] - out.l[f - stride]) / (2.0 * dom.spacing()[j]);
      sq += dj * dj;
    }
    if (!probe) continue;
    defect_c = std::max(defect_c, std::abs(sq) / (s * s));
  }
  out.eikonal_defect_c = defect_c;
  return out;
}

ComplexField VanishingDataCGO::field() const {
  ComplexField u(weighted.size());
  for (Eigen::Index f = 0; f < weighted.size(); ++f)
    u[f] = weighted[f] * std::exp(phi_values[f] / h);
  return u;
}

ComplexField VanishingDataCGO::boundary_trace() const {
  const auto& bnodes = dom->boundary();
  ComplexField tr(static_cast<Eigen::Index>(bnodes.size()));
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const Eigen::Index f = bnodes[b].node;
    tr[b] = weighted[f] * std::exp(phi_values[f] / h);
  }
  return tr;
}

VanishingDataCGO vanishing_data_cgo(const Domain& dom, const PhaseFamily& fam, int tau, double h,
                                    const Potential& q2, const BoundaryPartition& part,
                                    const WMinusSpec& wm, double collar_width) {
  const LogSpherePhase phase(fam);
  VanishingDataCGO out;
  out.dom = &dom;
  out.h = h;
  out.tau = tau;
  out.refl = reflected_phase(dom, fam, tau, part, collar_width, wm);
  out.amplitude = amplitude_field(dom, phase, +1, tau);
  out.phi_values = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) { return phase.phi(x); });

  // F = e^{(il - phi)/h} b, exponentially damped by e^{-k/h}
  out.reflected_weighted = ComplexField::Zero(dom.num_nodes());
  out.damping_max_err = 0.0;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    if (!out.refl.in_collar[f]) continue;
    const cd expo = (cd(0.0, 1.0) * out.refl.l[f] - cd(out.phi_values[f], 0.0)) / h;
    const cd val = std::exp(expo);
    out.reflected_weighted[f] = val * out.refl.b[f];
    out.damping_max_err =
        std::max(out.damping_max_err, std::abs(std::abs(val) - std::exp(-out.refl.k[f] / h)));
  }

  // rhs: cancel both the amplitude residual and the reflected-term residual;
  // the reflected part is differenced as the damped field F and carried back
  // to remainder space by the oscillatory factor (pointwise, no differencing)
  const ComplexField refl_resid = conjugated_apply(dom, phase, +1, h, q2.values,
                                                   out.reflected_weighted);
  ComplexField rhs = ComplexField::Zero(dom.num_nodes());
  for (const Eigen::Index f : dom.interior_nodes()) {
    const Eigen::VectorXd x = dom.point(f);
    const cd rho = h * transport_residual_analytic(phase, x, +1, tau) +
                   h * h * (cd(q2.values[f], 0.0) * phase.amplitude(x, +1, tau) -
                            phase.amplitude_lap(x, +1, tau));
    rhs[f] = -rho + std::exp(cd(0.0, -tau * phase.psi(x) / h)) * refl_resid[f];
  }
  const RemainderResult rem =
      solve_remainder(dom, phase, +1, tau, h, rhs, q2.values, RemainderTrace::PinMinus);
  out.remainder_l2 = rem.r_l2;

  out.weighted = ComplexField(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const cd osc = std::exp(cd(0.0, tau * phase.psi(dom.point(f)) / h));
    out.weighted[f] = osc * (out.amplitude[f] + rem.r[f]) - out.reflected_weighted[f];
  }

  double amax = 0.0;
  for (int b : out.refl.wminus_boundary)
    amax = std::max(amax, std::abs(out.amplitude[dom.boundary()[b].node]));
  double tr = 0.0;
  for (int b : out.refl.wminus_boundary)
    tr = std::max(tr, std::abs(out.weighted[dom.boundary()[b].node]));
  out.trace_rel_wminus = amax > 0.0 ? tr / amax : tr;
  return out;
}

AdjointSolveResult adjoint_solve_with_trace(const Domain& dom, const CarlemanWeight& w, double h,
                                            const RealField& q, const ComplexField& v,
                                            const ComplexField& v_minus,
                                            const BoundaryPartition& part) {
  const int d = dom.dim();
  const int n = dom.points_per_axis();
  const auto& bnodes = dom.boundary();

  // membership of boundary nodes in dOmega_- (constrained) and dOmega_+ (free)
  std::vector<char> minus_mask(bnodes.size(), 0);
  for (int b : part.signed_minus) minus_mask[b] = 1;
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const double s = bnodes[b].normal.dot(w.grad(dom.point(bnodes[b].node)));
    if (std::abs(s) < wmin) wmin = std::abs(s);
  }
  if (wmin < 1e-6)
    throw std::invalid_argument(
        "adjoint_solve_with_trace: nu.phi' not bounded away from zero on the boundary");

  // unknown ordering: interior nodes then free boundary nodes
  const auto& interior = dom.interior_nodes();
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  std::vector<Eigen::Index> col_of(dom.num_nodes(), -1);
  Eigen::Index ncols = 0;
  for (Eigen::Index ii = 0; ii < ni; ++ii) col_of[interior[ii]] = ncols++;
  std::vector<Eigen::Index> free_boundary;
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    if (minus_mask[b]) continue;
    col_of[bnodes[b].node] = ncols++;
    free_boundary.push_back(static_cast<Eigen::Index>(b));
  }

  // rows: conjugated operator e^{-phi/h} Pbar e^{phi/h} at interior nodes
  std::vector<Eigen::Triplet<cd>> trip;
  ComplexField rhs(ni);
  for (Eigen::Index ii = 0; ii < ni; ++ii) {
    const Eigen::Index f = interior[ii];
    const Eigen::VectorXd x = dom.point(f);
    const Eigen::VectorXd gphi = w.grad(x);
    cd fixed_contrib(0.0, 0.0);
    cd diag = cd(-(gphi.squaredNorm() + h * w.lap(x) - h * h * q[f]), 0.0);
    for (int axis = 0; axis < d; ++axis) {
      const double dx = dom.spacing()[axis];
      const double inv_d2 = 1.0 / (dx * dx);
      Eigen::Index stride = 1;
      for (int k = d - 1; k > axis; --k) stride *= n;
      diag += cd(2.0 * h * h * inv_d2, 0.0);
      const cd off_m(-h * h * inv_d2 + 2.0 * h * gphi[axis] / (2.0 * dx), 0.0);
      const cd off_p(-h * h * inv_d2 - 2.0 * h * gphi[axis] / (2.0 * dx), 0.0);
      for (const auto& [nb, off] : {std::pair{f - stride, off_m}, std::pair{f + stride, off_p}}) {
        const Eigen::Index col = col_of[nb];
        if (col >= 0)
          trip.emplace_back(ii, col, off);
        else
          fixed_contrib += off * v_minus[dom.boundary_pos(nb)];
      }
    }
    trip.emplace_back(ii, col_of[f], diag);
    rhs[ii] = v[f] - fixed_contrib;
  }
  Eigen::SparseMatrix<cd> A(ni, ncols);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  // minimum-norm solution through the normal equations A A^H y = rhs
  const Eigen::SparseMatrix<cd> AH = Eigen::SparseMatrix<cd>(A.adjoint());
  const Eigen::SparseMatrix<cd> G = A * AH;
  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  lu.compute(G);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("adjoint_solve_with_trace: normal equations are singular");
  const ComplexField y = lu.solve(rhs);
  const ComplexField z = AH * y;

  AdjointSolveResult out;
  out.u = ComplexField::Zero(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f)
    if (col_of[f] >= 0) out.u[f] = z[col_of[f]];
  for (std::size_t b = 0; b < bnodes.size(); ++b)
    if (minus_mask[b]) out.u[bnodes[b].node] = v_minus[b];

  const ComplexField resid = A * z - rhs;
  const double rhs_scale = std::max(1e-300, rhs.norm());
  out.eq_residual = resid.norm() / rhs_scale;
  out.norm_h0 = l2_norm(dom, out.u);
  double plus_sq = 0.0;
  for (int b : part.signed_plus) {
    const double s = bnodes[b].normal.dot(w.grad(dom.point(bnodes[b].node)));
    if (s <= 0.0) continue;
    plus_sq += bnodes[b].weight * std::norm(out.u[bnodes[b].node]) / s;
  }
  out.norm_plus = std::sqrt(h * plus_sq);
  double vm_sq = 0.0;
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    if (!minus_mask[b]) continue;
    const double s = -bnodes[b].normal.dot(w.grad(dom.point(bnodes[b].node)));
    if (s <= 0.0) continue;
    vm_sq += bnodes[b].weight * std::norm(v_minus[b]) / s;
  }
  out.rhs_minus_norm = std::sqrt(h * vm_sq);
  out.rhs_norm = l2_norm(dom, v);
  out.ratio = (out.norm_h0 + out.norm_plus) /
              std::max(1e-300, out.rhs_norm / h + out.rhs_minus_norm);
  return out;
}

PartialIdentityRun partial_identity_run(const Domain& dom, const Potential& q1, const Potential& q2,
                                        const PhaseFamily& fam, double lambda,
                                        const std::vector<double>& h_list, double eps0,
                                        const WMinusSpec& wm, double collar_width) {
  if (eps0 <= 0.0) eps0 = default_eps0(dom, fam.weight);
  PartialIdentityRun run;
  run.eps0 = eps0;
  run.lambda = lambda;
  run.theta = fam.theta();
  const BoundaryPartition part = partition_signed(dom, fam.weight, eps0);
  const RealField q_diff = q2.values - q1.values;
  run.limit_integral = nonlinear_fourier(dom, q_diff, run.theta, lambda);

  DirichletSolver<cd> solver1(dom, q1.values.cast<cd>());

  for (const double h : h_list) {
    const PhasePairFields pp = h_phase_pair(dom, fam, lambda, h);
    const VanishingDataCGO u2 = vanishing_data_cgo(dom, pp.fam2, -1, h, q2, part, wm, collar_width);
    const LogSpherePhase phase1(pp.fam1);
    const CGOSolution v = build_cgo(dom, phase1, -1, -1, h, q1);

    const ComplexField u2_field = u2.field();
    const ComplexField u1 = solver1.solve(u2.boundary_trace());
    const ComplexField u = u1 - u2_field;
    const ComplexField flux = normal_derivative(dom, u);
    const ComplexField vtrace = v.boundary_trace();

    PartialIdentityRecord rec;
    rec.base.h = h;
    rec.base.r1_l2 = v.remainder_l2;
    rec.base.r2_l2 = u2.remainder_l2;
    rec.trace_residual = u2.trace_rel_wminus;

    cd term1(0.0, 0.0), term2(0.0, 0.0);
    double qw2 = 0.0;
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const double vw = dom.volume_weight(f);
      const cd main_w = u2.weighted[f] + u2.reflected_weighted[f];
      term1 += vw * q_diff[f] * main_w * std::conj(v.weighted[f]);
      term2 += vw * q_diff[f] * u2.reflected_weighted[f] * std::conj(v.weighted[f]);
      const double t = q_diff[f] * std::abs(u2.weighted[f]);
      qw2 += vw * t * t;
    }
    rec.base.lhs = term1;
    rec.reflected_term = term2;

    ComplexField fv(flux.size());
    for (Eigen::Index b = 0; b < flux.size(); ++b)
      fv[b] = flux[b] * std::conj(vtrace[b]);
    double a1r1_sq = 0.0;
    for (int b : part.plus_eps)
      a1r1_sq += dom.boundary()[b].weight * std::norm(v.weighted[dom.boundary()[b].node]);
    rec.base.rhs_plus = boundary_integral(dom, fv, part.plus_eps);
    rec.base.minus_flux_abs = std::abs(boundary_integral(dom, fv, part.minus_eps));
    rec.base.bound_factor = h / eps0;
    rec.base.rhs_bound = std::sqrt(rec.base.bound_factor * a1r1_sq * qw2);
    run.records.push_back(rec);
  }
  return run;
}

}  // namespace cgolab
