#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cgolab/cgo.hpp"
#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/phases.hpp"
#include "cgolab/potential.hpp"

namespace cgolab {

// default eps0 = 0.05 * max over boundary nodes of nu.phi'
double default_eps0(const Domain& dom, const CarlemanWeight& w);

struct GreensReport {
  cd volume_term;         // int (Delta - q1)u vbar, evaluated from u
  cd adjoint_term;        // int u conj((Delta - q1bar) v)
  cd flux_plus;           // boundary flux over dOmega_{+,eps0}
  cd flux_minus;          // boundary flux over dOmega_{-,eps0}
  double residual_full;   // |volume - adjoint - flux_plus - flux_minus|
  double residual_restricted;  // |volume - adjoint - flux_plus| (use.7 form; valid under (use.5))
};

// u must have zero boundary trace
GreensReport greens_residual(const Domain& dom, const Potential& q1, const ComplexField& u,
                             const ComplexField& v, const BoundaryPartition& part);

struct IdentityRecord {
  double h = 0.0;
  cd lhs;           // volume side of (use.10)
  cd rhs_plus;      // flux side over dOmega_{+,eps0}
  double rhs_bound = 0.0;    // sqrt(h/eps0) ||a1+r1||_{dOmega+} ||q(a2+r2)||
  double bound_factor = 0.0; // h/eps0
  double r1_l2 = 0.0, r2_l2 = 0.0;
  double minus_flux_abs = 0.0;  // flux over dOmega_{-,eps0}; vanishes under the DN hypothesis
  double u2_residual = 0.0;
};

struct IdentityRun {
  std::vector<IdentityRecord> records;
  cd limit_integral;
  double eps0 = 0.0;
  double lambda = 0.0;
  Theta theta;
};

// The (use.2)-(use.16) experiment. u2 is the +phi CGO for q2 with phase
// -psi_y, v the -phi CGO for conj(q1) with phase -psi_{y_h}, y_h =
// exp_y(h*lambda*nu); u1 matches u2's Dirichlet trace.
IdentityRun orthogonality_run(const Domain& dom, const Potential& q1, const Potential& q2,
                              const PhaseFamily& fam, double lambda,
                              const std::vector<double>& h_list, double eps0 = -1.0);

struct PhasePairFields {
  PhaseFamily fam1;  // y stepped by h*lambda*nu
  PhaseFamily fam2;  // base y
  RealField quotient;  // (psi1 - psi2)/h on the lattice
  double max_err_vs_limit = 0.0;  // max |quotient - lambda f|
};

// realizes (use.10.5): the geodesic step h*lambda*nu must stay inside the
// admissible y-patch (radius patch_radius)
PhasePairFields h_phase_pair(const Domain& dom, const PhaseFamily& fam, double lambda, double h,
                             double patch_radius = 0.3);

// int q(x) (sin theta)^{-(n-2)} e^{-i orient (n-2) theta} e^{i orient lambda f} dx,
// the limit integrand of (use.12)/(pf.15) with the closed-form amplitudes
cd nonlinear_fourier(const Domain& dom, const RealField& q_diff, const Theta& theta, double lambda,
                     int orient = +1);

struct ThetaGridSpec {
  Eigen::VectorXd y0;
  double radius = 0.15;
  int n_y = 3;
  int nu_count = 3;
  std::vector<Eigen::VectorXd> xtilde_offsets;  // relative to xtilde_base
  Eigen::VectorXd xtilde_base;
  double nu_scale = 0.5;
  Eigen::VectorXd h_plane_normal;  // normal of the separating plane H
  double nu_cone = 0.2;            // radians around H's tangent directions
};

std::vector<Theta> make_theta_grid(const ThetaGridSpec& spec);

struct Discrimination {
  double max_value = 0.0;
  double noise_floor = 0.0;  // roundoff model of the quadrature
  double threshold = 0.0;
  bool distinct = false;
  bool degenerate_config = false;
  int argmax_theta = -1;
  double argmax_lambda = 0.0;
  std::vector<double> values;  // |nonlinear_fourier| per (theta, lambda) cell, theta-major
};

// threshold < 0 requests self-calibration at 10x the quadrature noise floor
Discrimination discriminate(const Domain& dom, const Potential& q1, const Potential& q2,
                            const std::vector<Theta>& thetas, const std::vector<double>& lambdas,
                            double threshold, int threads = 1);

}  // namespace cgolab
