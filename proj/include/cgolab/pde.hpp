#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/potential.hpp"

namespace cgolab {

// Raised when the discrete operator cannot certify that 0 avoids the
// spectrum of -Delta + q: the smallest eigenvalue sits inside the
// discretization error band, or the factorization is numerically singular.
struct EigenvalueZeroError : std::runtime_error {
  EigenvalueZeroError(const std::string& msg, double cond, double min_eig)
      : std::runtime_error(msg), cond_estimate(cond), min_eig_estimate(min_eig) {}
  double cond_estimate = 0.0;
  double min_eig_estimate = 0.0;
};

struct SolverStats {
  double cond_estimate = 0.0;
  double min_eig_estimate = 0.0;
};

// Sparse Dirichlet solver for (-Delta + q) u = rhs on the interior lattice
// with pinned boundary values. The factorization is shared by every solve.
template <class Scalar>
class DirichletSolver {
 public:
  DirichletSolver(const Domain& dom, const Field<Scalar>& q);

  // boundary_values: one entry per Domain::boundary() node; returns the full
  // lattice field with boundary pinned
  Field<Scalar> solve(const Field<Scalar>& boundary_values) const;
  // zero Dirichlet data, volume right-hand side (full lattice, interior used)
  Field<Scalar> solve_volume(const Field<Scalar>& rhs) const;
  // raw interior solve: rhs indexed by interior position
  Field<Scalar> solve_interior(const Field<Scalar>& rhs_interior) const;

  const SolverStats& stats() const { return stats_; }
  const Domain& domain() const { return *dom_; }

 private:
  const Domain* dom_;
  Eigen::SparseMatrix<Scalar> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu_;
  SolverStats stats_;
};

template <class Scalar>
Field<Scalar> solve_dirichlet(const Domain& dom, const Field<Scalar>& q,
                              const Field<Scalar>& boundary_values) {
  return DirichletSolver<Scalar>(dom, q).solve(boundary_values);
}

inline ComplexField solve_dirichlet(const Domain& dom, const Potential& q,
                                    const ComplexField& boundary_values) {
  return solve_dirichlet<cd>(dom, q.values.cast<cd>(), boundary_values);
}

// Dirichlet-to-Neumann matrix in the weighted-flux (variational) convention:
// (matrix * f)_i approximates w_i * d_nu u(x_i) for Dirichlet data f. The
// Schur-complement assembly keeps the matrix exactly symmetric for real q and
// entrywise second-order consistent at face-interior nodes.
template <class Scalar>
struct DNMap {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix;
  std::vector<Eigen::Index> nodes;  // boundary lattice nodes, row == col order
  Eigen::VectorXd flux_weights;     // surface weights w_i
  std::uint64_t potential_hash = 0;

  // flux densities d_nu u at boundary nodes for Dirichlet data f
  Field<Scalar> apply_flux_density(const Field<Scalar>& f) const {
    Field<Scalar> g = matrix * f;
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] /= Scalar(flux_weights[i]);
    return g;
  }
};

template <class Scalar>
DNMap<Scalar> assemble_dn(const Domain& dom, const Field<Scalar>& q);

inline DNMap<double> assemble_dn(const Domain& dom, const Potential& q) {
  return assemble_dn<double>(dom, q.values);
}

// divergence-form DN map: flux form with harmonic-mean face conductivities
DNMap<double> assemble_dn_conductivity(const Domain& dom, const Conductivity& gamma);

// rows = measurement set (front), cols = input support (back); positions into
// Domain::boundary() as produced by the partition operations
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> restrict_partial_dn(
    const DNMap<Scalar>& dn, const std::vector<int>& front_set, const std::vector<int>& back_set) {
  if (front_set.empty() || back_set.empty())
    throw std::invalid_argument("restrict_partial_dn: empty boundary set");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(front_set.size(), back_set.size());
  for (std::size_t i = 0; i < front_set.size(); ++i)
    for (std::size_t j = 0; j < back_set.size(); ++j)
      out(i, j) = dn.matrix(front_set[i], back_set[j]);
  return out;
}

// q = (Delta_h sqrt(gamma)) / sqrt(gamma); one-sided stencils extend the
// discrete Laplacian to the boundary nodes
Potential gamma_to_q(const Domain& dom, const Conductivity& gamma);

struct DnRelationReport {
  double residual = 0.0;  // operator-norm relative residual
  double norm_dn = 0.0;
};

// compares N_q against gamma^{-1/2} N_gamma gamma^{-1/2} + (1/2) gamma^{-1}
// d_nu(gamma), both sides in the weighted-flux convention
DnRelationReport dn_relation_check(const Domain& dom, const ConductivityGen& gamma_gen);

// spectral norm estimate by power iteration (deterministic start)
double operator_norm_estimate(const Eigen::MatrixXd& M, int iters = 40);

}  // namespace cgolab
