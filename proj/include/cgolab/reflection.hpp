#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cgolab/cgo.hpp"
#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/identity.hpp"
#include "cgolab/phases.hpp"
#include "cgolab/potential.hpp"

namespace cgolab {

// strict open subset of one front face: the centered sub-rectangle covering
// `fraction` of each tangential side
struct WMinusSpec {
  int face_axis = 0;
  int face_side = 0;
  double fraction = 0.5;
};

// Reflected phase l on a one-face collar: l = g + s*(d_nu g) + s^2 c2 in the
// inward distance s, with g = tau*psi - i*phi, so that l = g, d_nu l = -d_nu g
// on the face and (l')^2 = O(s^2).
struct ReflectedPhase {
  int face_axis = 0;
  int face_side = 0;
  double collar_width = 0.0;
  std::vector<char> in_collar;  // per lattice node
  ComplexField l;
  RealField k;       // Im l + phi
  ComplexField b;    // chi * a2 extended constant along nu (s-cutoff applied)
  double c_emp = 0.0;            // min over collar of k / s
  double c_ref = 0.0;            // 0.5 * min over the face of (-2 d_nu phi)
  double eikonal_defect_c = 0.0; // max |(l')^2| / s^2 over FD probes
  std::vector<int> wminus_boundary;  // boundary positions inside W_minus
};

ReflectedPhase reflected_phase(const Domain& dom, const PhaseFamily& fam, int tau,
                               const BoundaryPartition& part, double collar_width,
                               const WMinusSpec& wm);

// Prop 7.2 surrogate: u2~ = e^{(phi + i tau psi)/h}(a2 + r2~) - e^{il/h} b with
// r2~ solved under zero Dirichlet trace (so the trace vanishes on W_minus
// exactly) and the reflected piece exponentially damped by e^{-k/h}.
struct VanishingDataCGO {
  const Domain* dom = nullptr;
  double h = 0.0;
  int tau = -1;
  ReflectedPhase refl;
  ComplexField amplitude;
  ComplexField weighted;            // e^{-phi/h} u2~ on the lattice
  ComplexField reflected_weighted;  // F = e^{(il - phi)/h} b
  RealField phi_values;
  double remainder_l2 = 0.0;
  double trace_rel_wminus = 0.0;
  double damping_max_err = 0.0;

  ComplexField field() const;
  ComplexField boundary_trace() const;
};

VanishingDataCGO vanishing_data_cgo(const Domain& dom, const PhaseFamily& fam, int tau, double h,
                                    const Potential& q2, const BoundaryPartition& part,
                                    const WMinusSpec& wm, double collar_width);

// Prop 7.1 surrogate: minimum-norm least-squares solve of P*_phi u = v with
// u fixed to v_minus on dOmega_-; the normal equations replace Hahn-Banach.
struct AdjointSolveResult {
  ComplexField u;
  double eq_residual = 0.0;     // relative interior equation residual
  double norm_h0 = 0.0;         // ||u||
  double norm_plus = 0.0;       // sqrt(h) ||(phi'.nu)^{-1/2} u||_{dOmega+}
  double rhs_norm = 0.0;        // ||v||
  double rhs_minus_norm = 0.0;  // sqrt(h) ||(-phi'.nu)^{-1/2} v_minus||_{dOmega-}
  double ratio = 0.0;           // (norm_h0 + norm_plus) / max(rhs sums, eps)
};

AdjointSolveResult adjoint_solve_with_trace(const Domain& dom, const CarlemanWeight& w, double h,
                                            const RealField& q, const ComplexField& v,
                                            const ComplexField& v_minus,
                                            const BoundaryPartition& part);

struct PartialIdentityRecord {
  IdentityRecord base;
  cd reflected_term;  // second LHS term of (co.12)
  double trace_residual = 0.0;
};

struct PartialIdentityRun {
  std::vector<PartialIdentityRecord> records;
  cd limit_integral;
  double eps0 = 0.0;
  double lambda = 0.0;
  Theta theta;
};

PartialIdentityRun partial_identity_run(const Domain& dom, const Potential& q1, const Potential& q2,
                                        const PhaseFamily& fam, double lambda,
                                        const std::vector<double>& h_list, double eps0,
                                        const WMinusSpec& wm, double collar_width);

}  // namespace cgolab
