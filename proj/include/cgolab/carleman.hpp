#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/potential.hpp"
#include "cgolab/rng.hpp"
#include "cgolab/weights.hpp"

namespace cgolab {

struct InteriorEstimate {
  double h = 0.0;
  double lhs = 0.0;    // h (||e^{phi/h} u|| + ||hD e^{phi/h} u||)
  double rhs = 0.0;    // ||e^{phi/h} (-h^2 Delta + h^2 q) u||
  double ratio = 0.0;  // lhs / rhs
};

// u must vanish on the boundary and two stencil layers inside it
InteriorEstimate interior_estimate_ratio(const Domain& dom, const CarlemanWeight& w,
                                         const Potential& q, double h, const RealField& u);

struct BoundaryEstimate {
  double h = 0.0;
  double flux_minus = 0.0;  // -((phi'.nu) e^{phi/h} d_nu u, e^{phi/h} d_nu u) over dOmega-
  double interior_sq = 0.0; // ||e^{phi/h}u||^2 + ||e^{phi/h} h grad u||^2
  double volume_sq = 0.0;   // ||e^{phi/h}(-h^2 Delta + h^2 q)u||^2
  double flux_plus = 0.0;   // ((phi'.nu) e^{phi/h} d_nu u, ...) over dOmega+
  double c0 = 0.0;          // smallest C0 making (ce.24.7) hold
};

// u must have exactly zero boundary trace
BoundaryEstimate boundary_estimate_ratio(const Domain& dom, const CarlemanWeight& w,
                                         const Potential& q, double h, const RealField& u);

struct EstimateReport {
  std::vector<double> h_values;
  std::vector<double> constants;    // per-h worst interior ratio
  std::vector<int> argmax_test;     // index of the maximizing test field
  int test_count = 0;
  bool growth_flag = false;  // some constant grew by more than 2x as h halved
};

EstimateReport constant_sweep(const Domain& dom, const CarlemanWeight& w, const Potential& q,
                              const std::vector<double>& h_list,
                              const std::vector<RealField>& test_fields);

// interior-supported tensor bumps at seeded random centers and radii
std::vector<RealField> bump_test_family(const Domain& dom, int count, Rng& rng,
                                        double rho_min = 0.12, double rho_max = 0.3);

// product sine Dirichlet eigenfunction with exact zeros on the boundary nodes
RealField dirichlet_eigenfunction(const Domain& dom, const Eigen::VectorXi& modes);

}  // namespace cgolab
