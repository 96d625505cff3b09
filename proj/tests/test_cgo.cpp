#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cgolab/cgo.hpp"
#include "cgolab/rng.hpp"

using namespace cgolab;

namespace {
Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

Domain unit_cube(int n = 17) { return build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, n); }

PhaseFamily fixture() {
  return make_phase_family(vec3(-1, 0.5, 0.5), vec3(0, 0, 1), vec3(0, 1, 0));
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("transport of a constant amplitude vanishes for the linear phase") {
  const Domain dom = unit_cube(9);
  const LinearPhase phase(vec3(1, 0, 0), vec3(0, 1, 0));
  const ComplexField ones = ComplexField::Constant(dom.num_nodes(), cd(1.0, 0.0));
  const ComplexField La = transport_apply(dom, phase, -1, +1, ones);
  CHECK(linf_norm(La) == doctest::Approx(0.0));
}

TEST_CASE("closed-form log amplitude kills the transport operator analytically") {
  const LogSpherePhase phase(fixture());
  Rng rng(17);
  for (const int sigma : {+1, -1})
    for (const int tau : {+1, -1}) {
      double worst = 0.0;
      double amax = 0.0;
      for (int i = 0; i < 10000; ++i) {
        const Eigen::VectorXd x = rng.point_in_box(vec3(0, 0, 0), vec3(1, 1, 1));
        worst = std::max(worst, std::abs(transport_residual_analytic(phase, x, sigma, tau)));
        amax = std::max(amax, std::abs(phase.amplitude(x, sigma, tau)));
      }
      CHECK(worst <= 1e-8 * amax);
    }
}

TEST_CASE("discrete transport of the closed-form amplitude is O(spacing^2)") {
  const LogSpherePhase phase(fixture());
  std::vector<double> spacings, errs;
  for (const int n : {9, 17, 33}) {
    const Domain dom = unit_cube(n);
    const ComplexField a = amplitude_field(dom, phase, -1, +1);
    const ComplexField La = transport_apply(dom, phase, -1, +1, a);
    double worst = 0.0;
    for (const Eigen::Index f : dom.interior_nodes()) worst = std::max(worst, std::abs(La[f]));
    spacings.push_back(dom.max_spacing());
    errs.push_back(worst);
  }
  CHECK(fit_loglog_slope(spacings, errs) >= 1.9);
}

TEST_CASE("transport of a non-solution is bounded below (negative control)") {
  const Domain dom = unit_cube(9);
  const LogSpherePhase phase(fixture());
  ComplexField psi_field(dom.num_nodes());
  double min_grad_sq = 1e300;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const Eigen::VectorXd x = dom.point(f);
    psi_field[f] = cd(phase.psi(x), 0.0);
    min_grad_sq = std::min(min_grad_sq, phase.psi_grad(x).squaredNorm());
  }
  const ComplexField La = transport_apply(dom, phase, -1, +1, psi_field);
  double min_abs = 1e300;
  for (const Eigen::Index f : dom.interior_nodes()) min_abs = std::min(min_abs, std::abs(La[f]));
  // the imaginary part alone contributes 2 tau |grad psi|^2 plus O(spacing^2)
  CHECK(min_abs >= min_grad_sq);
}

TEST_CASE("amplitude closed-form values at the documented angles") {
  // theta = pi/2 at x - xtilde = (1,0,0), y = (0,0,1); sigma tau = -1
  const LogSpherePhase phase(
      make_phase_family(vec3(0, 0, 0), vec3(0, 0, 1), vec3(0, 1, 0)));
  const cd a90 = phase.amplitude(vec3(1, 0, 0), -1, +1);
  CHECK(a90.real() == doctest::Approx(std::cos(-M_PI / 4)));
  CHECK(a90.imag() == doctest::Approx(std::sin(-M_PI / 4)));
  CHECK(std::abs(a90) == doctest::Approx(1.0));

  // theta = pi/6: direction (sin(pi/6), 0, cos(pi/6)) from the center
  const Eigen::VectorXd x30 = vec3(std::sin(M_PI / 6), 0.0, std::cos(M_PI / 6));
  CHECK(std::abs(phase.amplitude(x30, -1, +1)) == doctest::Approx(std::sqrt(2.0)));

  // linear phase: a == 1
  const LinearPhase lin(vec3(1, 0, 0), vec3(0, 1, 0));
  CHECK(lin.amplitude(vec3(0.3, 0.4, 0.5), +1, -1) == cd(1.0, 0.0));
}

TEST_CASE("amplitude closed-form derivatives match finite differences") {
  const LogSpherePhase phase(fixture());
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = rng.point_in_box(vec3(0, 0, 0), vec3(1, 1, 1));
    const double d = 1e-5;
    Eigen::VectorXcd g_fd(3);
    cd lap_fd(0, 0);
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += d;
      xm[k] -= d;
      const cd ap = phase.amplitude(xp, +1, -1);
      const cd am = phase.amplitude(xm, +1, -1);
      const cd a0 = phase.amplitude(x, +1, -1);
      g_fd[k] = (ap - am) / (2 * d);
      lap_fd += (ap - 2.0 * a0 + am) / (d * d);
    }
    CHECK((g_fd - phase.amplitude_grad(x, +1, -1)).norm() < 1e-6);
    CHECK(std::abs(lap_fd - phase.amplitude_lap(x, +1, -1)) < 1e-4);
  }
}

TEST_CASE("wkb residual: linear phase with unit amplitude and q = 0 vanishes") {
  const Domain dom = unit_cube(9);
  const LinearPhase phase(vec3(1, 0, 0), vec3(0, 1, 0));
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const WkbReport rep = wkb_residual(dom, phase, -1, +1, 0.2, q0);
  CHECK(rep.raw_norm == doctest::Approx(0.0));
}

TEST_CASE("wkb residual scales as h^2 for the log phase") {
  const Domain dom = unit_cube(17);
  const LogSpherePhase phase(fixture());
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> raw;
  std::vector<double> ratios;
  for (const double h : hs) {
    const WkbReport rep = wkb_residual(dom, phase, -1, +1, h, q0);
    raw.push_back(rep.raw_norm);
    ratios.push_back(rep.norm_ratio);
  }
  CHECK(fit_loglog_slope(hs, raw) >= 1.9);
  // norm_ratio is approximately ||Delta a|| independent of h
  for (double r : ratios) CHECK(r == doctest::Approx(ratios.front()).epsilon(0.2));
}

TEST_CASE("wkb residual shift under q is bounded by ||q a||") {
  const Domain dom = unit_cube(17);
  const LogSpherePhase phase(fixture());
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const Potential qb = materialize(PotentialGen::ball_bump(vec3(0.5, 0.5, 0.5), 0.3, 2.0), dom);
  const double h = 0.2;
  const WkbReport r0 = wkb_residual(dom, phase, -1, +1, h, q0);
  const WkbReport rq = wkb_residual(dom, phase, -1, +1, h, qb);
  const ComplexField a = amplitude_field(dom, phase, -1, +1);
  ComplexField qa(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) qa[f] = qb.values[f] * a[f];
  CHECK(std::abs(rq.norm_ratio - r0.norm_ratio) <= l2_interior(dom, qa) + 1e-12);
}

TEST_CASE("remainder solve: zero right-hand side gives zero remainder") {
  const Domain dom = unit_cube(9);
  const LogSpherePhase phase(fixture());
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const ComplexField rhs = ComplexField::Zero(dom.num_nodes());
  const RemainderResult rem = solve_remainder(dom, phase, -1, +1, 0.2, rhs, q0.values);
  CHECK(rem.r_l2 == doctest::Approx(0.0));
}

TEST_CASE("remainder norm scales like h") {
  const Domain dom = unit_cube(17);
  const LogSpherePhase phase(fixture());
  const Potential qb = materialize(PotentialGen::ball_bump(vec3(0.5, 0.5, 0.5), 0.3, 1.0), dom);
  std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> norms;
  for (const double h : hs) {
    const CGOSolution sol = build_cgo(dom, phase, -1, +1, h, qb);
    norms.push_back(sol.remainder_l2);
  }
  CHECK(fit_loglog_slope(hs, norms) >= 0.9);
}

TEST_CASE("h far outside the semiclassical regime is flagged") {
  const Domain dom = unit_cube(9);
  const LogSpherePhase phase(fixture());
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const CGOSolution sol = build_cgo(dom, phase, -1, +1, 10.0, q0);
  CHECK_FALSE(sol.semiclassical_ok);
  const CGOSolution ok = build_cgo(dom, phase, -1, +1, 0.4, q0);
  CHECK(ok.semiclassical_ok);
  CHECK(ok.grid_ok);
  const CGOSolution warn = build_cgo(dom, phase, -1, +1, 0.2, q0);
  CHECK_FALSE(warn.grid_ok);  // 9^3 grid: 5 * spacing = 0.625 > 0.2
}

TEST_CASE("linear-phase cgo is the classical harmonic exponential") {
  const Domain dom = unit_cube(17);
  const LinearPhase phase(vec3(1, 0, 0), vec3(0, 1, 0));
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const CGOSolution sol = build_cgo(dom, phase, +1, +1, 0.4, q0);
  CHECK(sol.remainder_l2 < 1e-10);  // e^{x.zeta/h} is an exact solution, rhs = 0
  const double d2 = dom.max_spacing() * dom.max_spacing();
  CHECK(sol.residual_rel <= 10.0 * d2);
}

TEST_CASE("log-weight cgo discrete residual at h = 0.1") {
  const Domain dom = unit_cube(17);
  const LogSpherePhase phase(fixture());
  const Potential qb = materialize(PotentialGen::ball_bump(vec3(0.5, 0.5, 0.5), 0.25, 1.0), dom);
  const CGOSolution sol = build_cgo(dom, phase, +1, -1, 0.1, qb);
  const double d2 = dom.max_spacing() * dom.max_spacing();
  CHECK(sol.residual_rel <= 10.0 * d2);
  CHECK(sol.remainder_constant > 0.0);
}

TEST_CASE("sign flip produces the adjoint-side solution") {
  const Domain dom = unit_cube(17);
  const LogSpherePhase phase(fixture());
  const Potential qb = materialize(PotentialGen::ball_bump(vec3(0.4, 0.5, 0.6), 0.25, 1.5), dom);
  const CGOSolution v = build_cgo(dom, phase, -1, -1, 0.2, qb);
  const double d2 = dom.max_spacing() * dom.max_spacing();
  CHECK(v.residual_rel <= 10.0 * d2);
  // assembled field really is e^{-phi/h} * weighted
  const ComplexField u = v.field();
  const Eigen::Index f = dom.interior_nodes()[100];
  const double phi = phase.phi(dom.point(f));
  CHECK(std::abs(u[f] - v.weighted[f] * std::exp(-phi / 0.2)) < 1e-12 * std::abs(u[f]) + 1e-15);
}

TEST_CASE("cgo invariant: u = e^{(sigma phi + i tau psi)/h}(a + r) nodewise") {
  const Domain dom = unit_cube(9);
  const LogSpherePhase phase(fixture());
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const CGOSolution sol = build_cgo(dom, phase, +1, -1, 0.4, q0);
  const ComplexField u = sol.field();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index f = static_cast<Eigen::Index>(rng.next_u64() % dom.num_nodes());
    const Eigen::VectorXd x = dom.point(f);
    const cd expo = std::exp(cd(sol.sigma * phase.phi(x) / sol.h, sol.tau * phase.psi(x) / sol.h));
    const cd expected = expo * (sol.amplitude[f] + sol.remainder[f]);
    CHECK(std::abs(u[f] - expected) <= 1e-10 * std::abs(expected) + 1e-12);
  }
}
