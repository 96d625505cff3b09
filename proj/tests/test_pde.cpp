#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cgolab/pde.hpp"
#include "cgolab/rng.hpp"

using namespace cgolab;

namespace {
Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

Domain unit_cube(int n) { return build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, n); }

RealField boundary_values(const Domain& dom, double (*fn)(const Eigen::VectorXd&)) {
  RealField g(static_cast<Eigen::Index>(dom.boundary().size()));
  for (std::size_t b = 0; b < dom.boundary().size(); ++b)
    g[b] = fn(dom.point(dom.boundary()[b].node));
  return g;
}
}  // namespace

TEST_CASE("constants and linear functions are discrete-harmonic") {
  const Domain dom = unit_cube(9);
  const Potential q0 = materialize(PotentialGen::zero(), dom);
  const DirichletSolver<double> solver(dom, q0.values);

  const RealField ones = solver.solve(boundary_values(dom, [](const Eigen::VectorXd&) { return 1.0; }));
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) CHECK(ones[f] == doctest::Approx(1.0).epsilon(1e-11));

  const RealField lin = solver.solve(boundary_values(dom, [](const Eigen::VectorXd& x) { return x[0]; }));
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f)
    CHECK(lin[f] == doctest::Approx(dom.point(f)[0]).epsilon(1e-10));
}

TEST_CASE("zero-eigenvalue fixture q = -3 pi^2 triggers the failure path") {
  const Domain dom = unit_cube(17);
  const Potential q = materialize(PotentialGen::constant(-3.0 * M_PI * M_PI), dom);
  CHECK_THROWS_AS(DirichletSolver<double>(dom, q.values), EigenvalueZeroError);
}

TEST_CASE("well-separated negative q still solves") {
  const Domain dom = unit_cube(9);
  const Potential q = materialize(PotentialGen::constant(-10.0), dom);
  CHECK_NOTHROW(DirichletSolver<double>(dom, q.values));
}

TEST_CASE("normal derivative: linear, quadratic and constant fields") {
  const Domain dom = unit_cube(9);
  RealField u = evaluate_on_grid(dom, [](const Eigen::VectorXd& x) { return x[0]; });
  RealField flux = normal_derivative(dom, u);
  for (std::size_t b = 0; b < dom.boundary().size(); ++b) {
    const auto& bn = dom.boundary()[b];
    const double expected = bn.normal[0];
    CHECK(flux[b] == doctest::Approx(expected).epsilon(1e-12));
  }
  // quadratic is differentiated exactly by the 3-point one-sided stencil
  u = evaluate_on_grid(dom, [](const Eigen::VectorXd& x) { return x[0] * x[0]; });
  flux = normal_derivative(dom, u);
  for (std::size_t b = 0; b < dom.boundary().size(); ++b) {
    const auto& bn = dom.boundary()[b];
    const double x0 = dom.point(bn.node)[0];
    CHECK(flux[b] == doctest::Approx(2.0 * x0 * bn.normal[0]).epsilon(1e-11));
  }
  u = RealField::Constant(dom.num_nodes(), 3.25);
  flux = normal_derivative(dom, u);
  for (Eigen::Index b = 0; b < flux.size(); ++b) CHECK(flux[b] == doctest::Approx(0.0));
}

TEST_CASE("dn map: row sums vanish for q = 0") {
  const Domain dom = unit_cube(9);
  const DNMap<double> dn = assemble_dn(dom, materialize(PotentialGen::zero(), dom));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dn.matrix.cols());
  const Eigen::VectorXd flux = dn.matrix * ones;
  CHECK(flux.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dn map symmetry and reciprocity for real q") {
  const Domain dom = unit_cube(9);
  const Potential q =
      materialize(PotentialGen::ball_bump(vec3(0.45, 0.55, 0.5), 0.3, 2.0), dom);
  const DNMap<double> dn = assemble_dn(dom, q);
  const double asym = (dn.matrix - dn.matrix.transpose()).norm() / dn.matrix.norm();
  CHECK(asym <= 1e-8);
  CHECK(dn.matrix(3, 17) == doctest::Approx(dn.matrix(17, 3)).epsilon(1e-9));
}

TEST_CASE("dn map adjoint identity for complex q") {
  const Domain dom = unit_cube(7);
  ComplexField q = evaluate_on_grid(dom, [](const Eigen::VectorXd& x) {
    return cd(bump_profile((x - Eigen::Vector3d(0.5, 0.5, 0.5).eval()).norm() / 0.3),
              0.5 * bump_profile((x - Eigen::Vector3d(0.4, 0.6, 0.5).eval()).norm() / 0.25));
  });
  const DNMap<cd> dn_q = assemble_dn<cd>(dom, q);
  const ComplexField qbar = q.conjugate();
  const DNMap<cd> dn_qbar = assemble_dn<cd>(dom, qbar);
  const double rel =
      (dn_q.matrix.adjoint() - dn_qbar.matrix).norm() / dn_q.matrix.norm();
  CHECK(rel <= 1e-8);
}

TEST_CASE("partial restriction indexing and errors") {
  const Domain dom = unit_cube(7);
  const DNMap<double> dn = assemble_dn(dom, materialize(PotentialGen::zero(), dom));
  const int m = static_cast<int>(dn.matrix.rows());
  std::vector<int> all(m);
  for (int i = 0; i < m; ++i) all[i] = i;
  const Eigen::MatrixXd full = restrict_partial_dn(dn, all, all);
  CHECK((full - dn.matrix).norm() == 0.0);
  const Eigen::MatrixXd single = restrict_partial_dn(dn, {3}, {5});
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == dn.matrix(3, 5));
  CHECK_THROWS(restrict_partial_dn(dn, {}, all));
}

TEST_CASE("theorem 1.2 configuration: rows from front set, all columns") {
  const Domain dom = unit_cube(7);
  const DNMap<double> dn = assemble_dn(dom, materialize(PotentialGen::zero(), dom));
  const BoundaryPartition fb = partition_front_back(dom, vec3(-1, 0.5, 0.5));
  std::vector<int> all(dn.matrix.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const Eigen::MatrixXd partial = restrict_partial_dn(dn, fb.front, all);
  CHECK(partial.rows() == static_cast<Eigen::Index>(fb.front.size()));
  CHECK(partial.cols() == dn.matrix.cols());
}

TEST_CASE("flux of the dirichlet solution converges at order >= 1.8") {
  // smooth data g = x0^2 * x1 with q a smooth bump; compare flux densities at
  // the shared face point (0.5, 0.5, 0) across three nested grids
  const PotentialGen qgen = PotentialGen::ball_bump(vec3(0.5, 0.5, 0.5), 0.35, 1.5);
  std::vector<double> flux_val;
  for (const int n : {5, 9, 17}) {
    const Domain dom = unit_cube(n);
    const Potential q = materialize(qgen, dom);
    const DirichletSolver<double> solver(dom, q.values);
    RealField g(static_cast<Eigen::Index>(dom.boundary().size()));
    for (std::size_t b = 0; b < dom.boundary().size(); ++b) {
      const Eigen::VectorXd x = dom.point(dom.boundary()[b].node);
      g[b] = x[0] * x[0] * x[1];
    }
    const RealField u = solver.solve(g);
    const RealField flux = normal_derivative(dom, u);
    for (std::size_t b = 0; b < dom.boundary().size(); ++b) {
      const Eigen::VectorXd x = dom.point(dom.boundary()[b].node);
      if (std::abs(x[0] - 0.5) < 1e-12 && std::abs(x[1] - 0.5) < 1e-12 && std::abs(x[2]) < 1e-12)
        flux_val.push_back(flux[b]);
    }
  }
  REQUIRE(flux_val.size() == 3);
  const double e1 = std::abs(flux_val[0] - flux_val[2]);
  const double e2 = std::abs(flux_val[1] - flux_val[2]);
  // Richardson: for order p, e1/e2 ~ (4^p - ... ) >= about 2^1.8
  CHECK(e1 / e2 >= std::pow(2.0, 1.8));
}

TEST_CASE("gamma to q bridge") {
  const Domain dom = unit_cube(13);
  const Conductivity one = materialize(ConductivityGen{}, dom);
  const Potential q_one = gamma_to_q(dom, one);
  CHECK(q_one.max_norm < 1e-11);

  ConductivityGen gexp;
  gexp.kind = ConductivityGen::Kind::ExpLinear;
  gexp.rate = 2.0;
  gexp.axis = 0;
  const Conductivity gamma = materialize(gexp, dom);
  const Potential q = gamma_to_q(dom, gamma);
  // q = lap(e^{x0})/e^{x0} = 1 up to stencil order
  for (const Eigen::Index f : dom.interior_nodes())
    CHECK(q.values[f] == doctest::Approx(1.0).epsilon(2e-3));

  // gamma = 1 + small bump: q ~ lap(bump)/2 to first order
  ConductivityGen gb;
  gb.kind = ConductivityGen::Kind::OnePlusBump;
  gb.bump.kind = PotentialTerm::Kind::BallBump;
  gb.bump.center = vec3(0.5, 0.5, 0.5);
  gb.bump.radius = 0.3;
  gb.bump.height = 1e-4;
  const Conductivity gsmall = materialize(gb, dom);
  const Potential qb = gamma_to_q(dom, gsmall);
  const RealField bump = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) {
    return 1e-4 * bump_profile((x - vec3(0.5, 0.5, 0.5)).norm() / 0.3);
  });
  const RealField lapb = laplacian(dom, bump);
  for (const Eigen::Index f : dom.interior_nodes())
    CHECK(qb.values[f] == doctest::Approx(0.5 * lapb[f]).epsilon(1e-3).scale(1e-2));
}

TEST_CASE("gamma must be positive") {
  const Domain dom = unit_cube(5);
  Conductivity bad;
  bad.values = RealField::Constant(dom.num_nodes(), -1.0);
  bad.min_value = -1.0;
  CHECK_THROWS(gamma_to_q(dom, bad));
}

TEST_CASE("dn relation: identity conductivity gives residual at roundoff") {
  const Domain dom = unit_cube(7);
  const DnRelationReport rep = dn_relation_check(dom, ConductivityGen{});
  CHECK(rep.residual <= 1e-8);
}

TEST_CASE("dn relation residual converges at order >= 1.8 for gamma = e^{2 x0}") {
  ConductivityGen g;
  g.kind = ConductivityGen::Kind::ExpLinear;
  g.rate = 2.0;
  g.axis = 0;
  std::vector<double> res;
  for (const int n : {7, 13, 25})
    res.push_back(dn_relation_check(unit_cube(n), g).residual);
  CHECK(res[0] > res[1]);
  CHECK(res[1] > res[2]);
  const double order = std::log2(res[1] / res[2]) /
                       std::log2((1.0 / 12.0) / (1.0 / 24.0));
  CHECK(order >= 1.8);
}

TEST_CASE("dn relation: normal-gamma-derivative-free fixture drops the zeroth term") {
  // gamma = 1 + interior bump: d_nu gamma = 0 on the boundary
  ConductivityGen g;
  g.kind = ConductivityGen::Kind::OnePlusBump;
  g.bump.kind = PotentialTerm::Kind::BallBump;
  g.bump.center = vec3(0.5, 0.5, 0.5);
  g.bump.radius = 0.25;
  g.bump.height = 0.8;
  const Domain dom = unit_cube(13);
  const Conductivity gamma = materialize(g, dom);
  const RealField dnu = normal_derivative(dom, gamma.values);
  CHECK(dnu.cwiseAbs().maxCoeff() < 1e-12);
  // gamma == 1 on the boundary: the relation reduces to N_q vs N_gamma directly
  const Potential q = gamma_to_q(dom, gamma);
  const DNMap<double> dn_q = assemble_dn(dom, q);
  const DNMap<double> dn_g = assemble_dn_conductivity(dom, gamma);
  const double rel = operator_norm_estimate(dn_q.matrix - dn_g.matrix) /
                     operator_norm_estimate(dn_q.matrix);
  CHECK(rel < 5e-3);
}

TEST_CASE("discrete green identity residual is at discretization scale") {
  const Domain dom = unit_cube(9);
  const Potential q = materialize(PotentialGen::ball_bump(vec3(0.5, 0.5, 0.5), 0.3, 1.0), dom);
  const DirichletSolver<double> solver(dom, q.values);
  RealField g1(static_cast<Eigen::Index>(dom.boundary().size()));
  RealField g2(static_cast<Eigen::Index>(dom.boundary().size()));
  for (std::size_t b = 0; b < dom.boundary().size(); ++b) {
    const Eigen::VectorXd x = dom.point(dom.boundary()[b].node);
    g1[b] = std::sin(M_PI * x[1]) * x[0];
    g2[b] = std::cos(M_PI * x[2]) + x[1];
  }
  const RealField u = solver.solve(g1);
  const RealField v = solver.solve(g2);
  const RealField fu = normal_derivative(dom, u);
  const RealField fv = normal_derivative(dom, v);
  // int (qu)v - boundary terms: for two solutions the asymmetric combination
  // int [(Delta u) v - u (Delta v)] equals the boundary flux difference
  double vol = 0.0;
  const RealField lap_u = laplacian(dom, u);
  const RealField lap_v = laplacian(dom, v);
  for (const Eigen::Index f : dom.interior_nodes())
    vol += dom.volume_weight(f) * (lap_u[f] * v[f] - u[f] * lap_v[f]);
  double bdry = 0.0;
  for (std::size_t b = 0; b < dom.boundary().size(); ++b)
    bdry += dom.boundary()[b].weight * (fu[b] * v[dom.boundary()[b].node] -
                                        u[dom.boundary()[b].node] * fv[b]);
  const double scale = l2_norm(dom, u) * l2_norm(dom, v);
  CHECK(std::abs(vol - bdry) <= 50.0 * dom.max_spacing() * dom.max_spacing() * std::max(1.0, scale));
}
