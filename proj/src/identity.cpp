#include "cgolab/identity.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "cgolab/parallel.hpp"
#include "cgolab/pde.hpp"

namespace cgolab {

double default_eps0(const Domain& dom, const CarlemanWeight& w) {
  double m = 0.0;
  for (const auto& bn : dom.boundary()) m = std::max(m, bn.normal.dot(w.grad(dom.point(bn.node))));
  return 0.05 * m;
}

GreensReport greens_residual(const Domain& dom, const Potential& q1, const ComplexField& u,
                             const ComplexField& v, const BoundaryPartition& part) {
  const double umax = linf_norm(u);
  for (const auto& bn : dom.boundary())
    if (std::abs(u[bn.node]) > 1e-10 * umax)
      throw std::invalid_argument("greens_residual: u must have zero boundary trace");

  const ComplexField lap_u = laplacian(dom, u);
  const ComplexField lap_v = laplacian(dom, v);
  GreensReport rep;
  rep.volume_term = cd(0, 0);
  rep.adjoint_term = cd(0, 0);
  for (const Eigen::Index f : dom.interior_nodes()) {
    const double vw = dom.volume_weight(f);
    const cd source = lap_u[f] - cd(q1.values[f], 0.0) * u[f];  // (Delta - q1) u = q u2
    rep.volume_term += vw * source * std::conj(v[f]);
    rep.adjoint_term += vw * u[f] * std::conj(lap_v[f] - cd(q1.values[f], 0.0) * v[f]);
  }
  const ComplexField flux = normal_derivative(dom, u);
  ComplexField fv(flux.size());
  for (Eigen::Index b = 0; b < flux.size(); ++b)
    fv[b] = flux[b] * std::conj(v[dom.boundary()[b].node]);
  rep.flux_plus = boundary_integral(dom, fv, part.plus_eps);
  rep.flux_minus = boundary_integral(dom, fv, part.minus_eps);
  rep.residual_full = std::abs(rep.volume_term - rep.adjoint_term - rep.flux_plus - rep.flux_minus);
  rep.residual_restricted = std::abs(rep.volume_term - rep.adjoint_term - rep.flux_plus);
  return rep;
}

PhasePairFields h_phase_pair(const Domain& dom, const PhaseFamily& fam, double lambda, double h,
                             double patch_radius) {
  const double step = h * std::abs(lambda) * fam.nu.norm();
  if (step > patch_radius)
    throw std::invalid_argument("h_phase_pair: geodesic step h*lambda*|nu| leaves the y-patch");
  PhasePairFields out;
  out.fam2 = fam;
  out.fam1 = fam;
  out.fam1.y = sphere_exp(fam.y, h * lambda * fam.nu);
  // nu is not re-transported; f only needs the base family's nu
  out.quotient = RealField(dom.num_nodes());
  out.max_err_vs_limit = 0.0;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const Eigen::VectorXd x = dom.point(f);
    out.quotient[f] = (psi_angle(out.fam1, x) - psi_angle(out.fam2, x)) / h;
    const double fl = lambda * eval_f(x, fam.theta()).first;
    out.max_err_vs_limit = std::max(out.max_err_vs_limit, std::abs(out.quotient[f] - fl));
  }
  return out;
}

cd nonlinear_fourier(const Domain& dom, const RealField& q_diff, const Theta& theta, double lambda,
                     int orient) {
  if (q_diff.size() != dom.num_nodes())
    throw std::invalid_argument("nonlinear_fourier: field size mismatch");
  const int m = dom.dim() - 2;
  PhaseFamily fam = make_phase_family(theta.xtilde, theta.y, theta.nu);
  cd acc(0.0, 0.0);
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    if (q_diff[f] == 0.0) continue;
    const Eigen::VectorXd x = dom.point(f);
    const double th = psi_angle(fam, x);
    const double fv = eval_f(x, theta).first;
    const cd amp = std::pow(std::sin(th), -m) * std::exp(cd(0.0, -orient * m * th));
    acc += dom.volume_weight(f) * q_diff[f] * amp * std::exp(cd(0.0, orient * lambda * fv));
  }
  return acc;
}

IdentityRun orthogonality_run(const Domain& dom, const Potential& q1, const Potential& q2,
                              const PhaseFamily& fam, double lambda,
                              const std::vector<double>& h_list, double eps0) {
  if (eps0 <= 0.0) eps0 = default_eps0(dom, fam.weight);
  IdentityRun run;
  run.eps0 = eps0;
  run.lambda = lambda;
  run.theta = fam.theta();
  const BoundaryPartition part = partition_signed(dom, fam.weight, eps0);

  RealField q_diff = q2.values - q1.values;
  run.limit_integral = nonlinear_fourier(dom, q_diff, run.theta, lambda);

  DirichletSolver<cd> solver1(dom, q1.values.cast<cd>());

  for (const double h : h_list) {
    const PhasePairFields pp = h_phase_pair(dom, fam, lambda, h);
    const LogSpherePhase phase2(pp.fam2);
    const LogSpherePhase phase1(pp.fam1);

    // u2 = e^{(phi - i psi_y)/h}(a2 + r2), (Delta - q2) u2 ~ 0
    const CGOSolution u2 = build_cgo(dom, phase2, +1, -1, h, q2);
    // v = e^{(-phi - i psi_{y_h})/h}(a1 + r1), (Delta - conj(q1)) v ~ 0
    const CGOSolution v = build_cgo(dom, phase1, -1, -1, h, q1);

    const ComplexField u2_field = u2.field();
    const ComplexField u1 = solver1.solve(u2.boundary_trace());
    const ComplexField u = u1 - u2_field;
    const ComplexField flux = normal_derivative(dom, u);
    const ComplexField vtrace = v.boundary_trace();

    IdentityRecord rec;
    rec.h = h;
    rec.r1_l2 = v.remainder_l2;
    rec.r2_l2 = u2.remainder_l2;
    rec.u2_residual = u2.residual_rel;

    cd lhs(0.0, 0.0);
    double qw2 = 0.0;
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const double vw = dom.volume_weight(f);
      lhs += vw * q_diff[f] * u2.weighted[f] * std::conj(v.weighted[f]);
      const double t = q_diff[f] * std::abs(u2.weighted[f]);
      qw2 += vw * t * t;
    }
    rec.lhs = lhs;

    ComplexField fv(flux.size());
    double a1r1_sq = 0.0;
    for (Eigen::Index b = 0; b < flux.size(); ++b)
      fv[b] = flux[b] * std::conj(vtrace[b]);
    for (int b : part.plus_eps)
      a1r1_sq += dom.boundary()[b].weight * std::norm(v.weighted[dom.boundary()[b].node]);
    rec.rhs_plus = boundary_integral(dom, fv, part.plus_eps);
    rec.minus_flux_abs = std::abs(boundary_integral(dom, fv, part.minus_eps));
    rec.bound_factor = h / eps0;
    rec.rhs_bound = std::sqrt(rec.bound_factor * a1r1_sq * qw2);
    run.records.push_back(rec);
  }
  return run;
}

std::vector<Theta> make_theta_grid(const ThetaGridSpec& spec) {
  const int n = static_cast<int>(spec.y0.size());
  // tangent frame at y0
  std::vector<Eigen::VectorXd> frame;
  frame.push_back(spec.y0);
  for (int k = 0; k < n && static_cast<int>(frame.size()) < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, k);
    for (const auto& b : frame) v -= b.dot(v) * b;
    if (v.norm() > 1e-8) frame.push_back(v.normalized());
  }
  const Eigen::VectorXd t1 = frame[1];
  const Eigen::VectorXd t2 = frame.size() > 2 ? frame[2] : frame[1];

  std::vector<Theta> grid;
  for (int iy = 0; iy < spec.n_y; ++iy) {
    Eigen::VectorXd y = spec.y0;
    if (iy > 0) {
      const double ang = 2.0 * M_PI * iy / spec.n_y;
      y = sphere_exp(spec.y0, spec.radius * (std::cos(ang) * t1 + std::sin(ang) * t2));
    }
    // nu spread around the H-tangent direction inside the tangent plane at y
    Eigen::VectorXd w = spec.h_plane_normal.normalized();
    Eigen::VectorXd t_perp = w - w.dot(y) * y;  // projection of the plane normal
    if (t_perp.norm() < 1e-8) t_perp = t1 - t1.dot(y) * y;
    t_perp.normalize();
    Eigen::VectorXd nu_base;  // tangent at y and tangent to H
    {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < n; ++k) {
        v = Eigen::VectorXd::Unit(n, k);
        v -= v.dot(y) * y;
        v -= v.dot(t_perp) * t_perp;
        if (v.norm() > 1e-6) break;
      }
      nu_base = v.normalized();
    }
    for (int inu = 0; inu < spec.nu_count; ++inu) {
      const double a = spec.nu_count == 1
                           ? 0.0
                           : -spec.nu_cone + 2.0 * spec.nu_cone * inu / (spec.nu_count - 1);
      const Eigen::VectorXd nu =
          spec.nu_scale * (std::cos(a) * nu_base + std::sin(a) * t_perp);
      for (const auto& off : spec.xtilde_offsets) {
        Theta th;
        th.y = y;
        th.nu = nu;
        th.xtilde = spec.xtilde_base + off;
        grid.push_back(th);
      }
    }
  }
  return grid;
}

Discrimination discriminate(const Domain& dom, const Potential& q1, const Potential& q2,
                            const std::vector<Theta>& thetas, const std::vector<double>& lambdas,
                            double threshold, int threads) {
  if (thetas.empty() || lambdas.empty())
    throw std::invalid_argument("discriminate: empty parameter grid");
  const RealField q_diff = q2.values - q1.values;
  Discrimination out;
  out.values.assign(thetas.size() * lambdas.size(), 0.0);
  parallel_for(thetas.size(), threads, [&](std::size_t it) {
    for (std::size_t il = 0; il < lambdas.size(); ++il) {
      const cd val = nonlinear_fourier(dom, q_diff, thetas[it], lambdas[il]);
      out.values[it * lambdas.size() + il] = std::abs(val);
    }
  });
  for (std::size_t it = 0; it < thetas.size(); ++it)
    for (std::size_t il = 0; il < lambdas.size(); ++il) {
      const double v = out.values[it * lambdas.size() + il];
      if (v > out.max_value) {
        out.max_value = v;
        out.argmax_theta = static_cast<int>(it);
        out.argmax_lambda = lambdas[il];
      }
    }

  // roundoff model of the quadrature: eps * sum of |integrand| mass
  const int m = dom.dim() - 2;
  double mass = 0.0;
  {
    PhaseFamily fam = make_phase_family(thetas[0].xtilde, thetas[0].y, thetas[0].nu);
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const double th = psi_angle(fam, dom.point(f));
      mass += dom.volume_weight(f) * std::pow(std::sin(th), -m);
    }
  }
  const double qscale = std::max({q1.max_norm, q2.max_norm, 1.0});
  out.noise_floor = 64.0 * DBL_EPSILON * mass * qscale;

  if (threshold < 0.0) threshold = 10.0 * out.noise_floor;
  out.threshold = threshold;
  if (!std::isfinite(threshold)) {
    out.degenerate_config = true;
    out.distinct = false;
    return out;
  }
  out.distinct = out.max_value > threshold;
  return out;
}

}  // namespace cgolab
