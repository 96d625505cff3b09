#include "cgolab/pde.hpp"

#include <cmath>
#include <vector>

#include "cgolab/rng.hpp"

namespace cgolab {

namespace {

// reference eigenvalue scale for the zero-eigenvalue band: max(|q|_inf,
// sum_k pi^2/L_k^2), the fundamental Dirichlet scale of the box
double lambda_ref(const Domain& dom, double q_max) {
  double lam = 0.0;
  for (int k = 0; k < dom.dim(); ++k) {
    const double L = dom.hi()[k] - dom.lo()[k];
    lam += M_PI * M_PI / (L * L);
  }
  return std::max(lam, q_max);
}

template <class Scalar>
double max_abs(const Field<Scalar>& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(cd(v[i])));
  return m;
}

template <class Scalar>
SolverStats singularity_check(const Eigen::SparseMatrix<Scalar>& A,
                              const Eigen::SparseLU<Eigen::SparseMatrix<Scalar>>& lu,
                              double band_threshold, const char* what) {
  const Eigen::Index n = A.rows();
  // ||A||_inf
  std::vector<double> rowsum(n, 0.0);
  for (int k = 0; k < A.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it)
      rowsum[it.row()] += std::abs(cd(it.value()));
  double norm_a = 0.0;
  for (double r : rowsum) norm_a = std::max(norm_a, r);

  // inverse power iteration for the smallest |eigenvalue|
  Rng rng(0x5eedULL);
  Field<Scalar> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = Scalar(rng.uniform(-1.0, 1.0));
  x /= x.norm();
  double growth = 1.0;
  for (int it = 0; it < 12; ++it) {
    Field<Scalar> y = lu.solve(x);
    const double ny = y.norm();
    if (!(ny > 0.0) || !std::isfinite(ny))
      throw EigenvalueZeroError(std::string(what) + ": factorization produced a non-finite solve",
                                std::numeric_limits<double>::infinity(), 0.0);
    growth = ny;
    x = y / ny;
  }
  SolverStats st;
  st.min_eig_estimate = 1.0 / growth;
  st.cond_estimate = norm_a * growth;
  if (st.cond_estimate > 1e12)
    throw EigenvalueZeroError(
        std::string(what) + ": near-singular system, condition estimate " +
            std::to_string(st.cond_estimate) + " (0 appears to be an eigenvalue of -Delta+q)",
        st.cond_estimate, st.min_eig_estimate);
  if (st.min_eig_estimate < band_threshold)
    throw EigenvalueZeroError(
        std::string(what) + ": smallest eigenvalue " + std::to_string(st.min_eig_estimate) +
            " lies inside the discretization band " + std::to_string(band_threshold) +
            "; cannot certify that 0 is not an eigenvalue of -Delta+q",
        st.cond_estimate, st.min_eig_estimate);
  return st;
}

}  // namespace

template <class Scalar>
DirichletSolver<Scalar>::DirichletSolver(const Domain& dom, const Field<Scalar>& q) : dom_(&dom) {
  if (q.size() != dom.num_nodes())
    throw std::invalid_argument("DirichletSolver: potential field size mismatch");
  const auto& interior = dom.interior_nodes();
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(ni * (2 * dom.dim() + 1));
  const int n = dom.points_per_axis();
  for (Eigen::Index ii = 0; ii < ni; ++ii) {
    const Eigen::Index f = interior[ii];
    Scalar diag = q[f];
    for (int axis = 0; axis < dom.dim(); ++axis) {
      const double inv_d2 = 1.0 / (dom.spacing()[axis] * dom.spacing()[axis]);
      Eigen::Index stride = 1;
      for (int k = dom.dim() - 1; k > axis; --k) stride *= n;
      diag += Scalar(2.0 * inv_d2);
      for (const Eigen::Index nb : {f - stride, f + stride}) {
        const Eigen::Index jj = dom.interior_pos(nb);
        if (jj >= 0) trip.emplace_back(ii, jj, Scalar(-inv_d2));
      }
    }
    trip.emplace_back(ii, ii, diag);
  }
  A_.resize(ni, ni);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
  lu_.compute(A_);
  if (lu_.info() != Eigen::Success)
    throw EigenvalueZeroError("DirichletSolver: sparse LU factorization failed (0.1 violated?)",
                              std::numeric_limits<double>::infinity(), 0.0);
  const double band = dom.max_spacing() * dom.max_spacing() * lambda_ref(dom, max_abs(q));
  stats_ = singularity_check(A_, lu_, band, "DirichletSolver");
}

template <class Scalar>
Field<Scalar> DirichletSolver<Scalar>::solve(const Field<Scalar>& boundary_values) const {
  const auto& bnodes = dom_->boundary();
  if (boundary_values.size() != static_cast<Eigen::Index>(bnodes.size()))
    throw std::invalid_argument("DirichletSolver::solve: boundary data size mismatch");
  Field<Scalar> full = Field<Scalar>::Zero(dom_->num_nodes());
  for (std::size_t b = 0; b < bnodes.size(); ++b) full[bnodes[b].node] = boundary_values[b];

  const auto& interior = dom_->interior_nodes();
  Field<Scalar> rhs = Field<Scalar>::Zero(static_cast<Eigen::Index>(interior.size()));
  const int n = dom_->points_per_axis();
  for (Eigen::Index ii = 0; ii < rhs.size(); ++ii) {
    const Eigen::Index f = interior[ii];
    for (int axis = 0; axis < dom_->dim(); ++axis) {
      const double inv_d2 = 1.0 / (dom_->spacing()[axis] * dom_->spacing()[axis]);
      Eigen::Index stride = 1;
      for (int k = dom_->dim() - 1; k > axis; --k) stride *= n;
      for (const Eigen::Index nb : {f - stride, f + stride})
        if (dom_->interior_pos(nb) < 0) rhs[ii] += Scalar(inv_d2) * full[nb];
    }
  }
  const Field<Scalar> ui = lu_.solve(rhs);
  for (Eigen::Index ii = 0; ii < ui.size(); ++ii) full[interior[ii]] = ui[ii];
  return full;
}

template <class Scalar>
Field<Scalar> DirichletSolver<Scalar>::solve_volume(const Field<Scalar>& rhs) const {
  const auto& interior = dom_->interior_nodes();
  Field<Scalar> ri(static_cast<Eigen::Index>(interior.size()));
  for (Eigen::Index ii = 0; ii < ri.size(); ++ii) ri[ii] = rhs[interior[ii]];
  const Field<Scalar> ui = lu_.solve(ri);
  Field<Scalar> full = Field<Scalar>::Zero(dom_->num_nodes());
  for (Eigen::Index ii = 0; ii < ui.size(); ++ii) full[interior[ii]] = ui[ii];
  return full;
}

template <class Scalar>
Field<Scalar> DirichletSolver<Scalar>::solve_interior(const Field<Scalar>& rhs_interior) const {
  return lu_.solve(rhs_interior);
}

template class DirichletSolver<double>;
template class DirichletSolver<cd>;

namespace {

// Symmetric lattice energy form: sum over edges of c_edge (Du)(Dv) plus the
// volume-weighted zeroth-order diagonal. gamma == nullptr means coefficient 1;
// q == nullptr means no diagonal. The Schur complement onto the boundary
// nodes is the weighted-flux DN matrix.
template <class Scalar>
DNMap<Scalar> assemble_dn_generic(const Domain& dom, const RealField* gamma,
                                  const Field<Scalar>* q) {
  const auto& bnodes = dom.boundary();
  const auto& interior = dom.interior_nodes();
  const Eigen::Index m = static_cast<Eigen::Index>(bnodes.size());
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  const int n = dom.points_per_axis();
  const int d = dom.dim();

  std::vector<Eigen::Triplet<Scalar>> trip_ii, trip_bb, trip_bi;
  auto add = [&](Eigen::Index a, Eigen::Index b, Scalar v) {
    const Eigen::Index ia = dom.interior_pos(a);
    const Eigen::Index ib = dom.interior_pos(b);
    if (ia >= 0 && ib >= 0)
      trip_ii.emplace_back(ia, ib, v);
    else if (ia < 0 && ib < 0)
      trip_bb.emplace_back(dom.boundary_pos(a), dom.boundary_pos(b), v);
    else if (ia < 0)
      trip_bi.emplace_back(dom.boundary_pos(a), ib, v);
    // interior-row x boundary-col entries are recovered from symmetry
  };

  for (int axis = 0; axis < d; ++axis) {
    Eigen::Index stride = 1;
    for (int k = d - 1; k > axis; --k) stride *= n;
    const double dx = dom.spacing()[axis];
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const Eigen::VectorXi idx = dom.multi(f);
      if (idx[axis] == n - 1) continue;
      const Eigen::Index g = f + stride;
      double c = 1.0 / dx;  // transverse trapezoid area / edge length
      for (int j = 0; j < d; ++j) {
        if (j == axis) continue;
        double w = dom.spacing()[j];
        if (idx[j] == 0 || idx[j] == n - 1) w *= 0.5;
        c *= w;
      }
      if (gamma) {
        const double ga = (*gamma)[f];
        const double gb = (*gamma)[g];
        c *= 2.0 * ga * gb / (ga + gb);
      }
      const Scalar cs(c);
      add(f, f, cs);
      add(g, g, cs);
      add(f, g, -cs);
      add(g, f, -cs);
    }
  }
  if (q) {
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f)
      add(f, f, Scalar(dom.volume_weight(f)) * (*q)[f]);
  }

  Eigen::SparseMatrix<Scalar> Kii(ni, ni), Kbb(m, m), Kbi(m, ni);
  Kii.setFromTriplets(trip_ii.begin(), trip_ii.end());
  Kbb.setFromTriplets(trip_bb.begin(), trip_bb.end());
  Kbi.setFromTriplets(trip_bi.begin(), trip_bi.end());
  Kii.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(Kii);
  if (lu.info() != Eigen::Success)
    throw EigenvalueZeroError("assemble_dn: interior factorization failed",
                              std::numeric_limits<double>::infinity(), 0.0);
  double cell = 1.0;
  for (int k = 0; k < d; ++k) cell *= dom.spacing()[k];
  double qmax = 0.0;
  if (q) qmax = max_abs(*q);
  const double band = gamma ? 0.0
                            : cell * dom.max_spacing() * dom.max_spacing() * lambda_ref(dom, qmax);
  singularity_check(Kii, lu, band, "assemble_dn");

  DNMap<Scalar> dn;
  dn.matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(Kbb);
  dn.nodes.reserve(m);
  dn.flux_weights.resize(m);
  for (Eigen::Index b = 0; b < m; ++b) {
    dn.nodes.push_back(bnodes[b].node);
    dn.flux_weights[b] = bnodes[b].weight;
  }
  if (q)
    dn.potential_hash = field_hash(*q);
  else if (gamma)
    dn.potential_hash = field_hash(*gamma);

  const Eigen::SparseMatrix<Scalar> Kib = Eigen::SparseMatrix<Scalar>(Kbi.transpose());
  const Eigen::Index chunk = 512;
  for (Eigen::Index j0 = 0; j0 < m; j0 += chunk) {
    const Eigen::Index c = std::min(chunk, m - j0);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rhs =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(Kib.middleCols(j0, c));
    rhs = -rhs;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> U = lu.solve(rhs);
    dn.matrix.middleCols(j0, c) += Kbi * U;
  }
  return dn;
}

}  // namespace

template <class Scalar>
DNMap<Scalar> assemble_dn(const Domain& dom, const Field<Scalar>& q) {
  if (q.size() != dom.num_nodes()) throw std::invalid_argument("assemble_dn: field size mismatch");
  return assemble_dn_generic<Scalar>(dom, nullptr, &q);
}

template DNMap<double> assemble_dn<double>(const Domain&, const Field<double>&);
template DNMap<cd> assemble_dn<cd>(const Domain&, const Field<cd>&);

DNMap<double> assemble_dn_conductivity(const Domain& dom, const Conductivity& gamma) {
  if (gamma.values.size() != dom.num_nodes())
    throw std::invalid_argument("assemble_dn_conductivity: field size mismatch");
  return assemble_dn_generic<double>(dom, &gamma.values, nullptr);
}

Potential gamma_to_q(const Domain& dom, const Conductivity& gamma) {
  if (!(gamma.min_value > 0.0)) throw std::invalid_argument("gamma_to_q: gamma must be positive");
  RealField root = gamma.values.array().sqrt().matrix();
  const RealField lap = laplacian(dom, root);
  RealField q(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) q[f] = lap[f] / root[f];
  return make_potential(dom, q);
}

double operator_norm_estimate(const Eigen::MatrixXd& M, int iters) {
  Eigen::VectorXd v(M.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i) + 1.0);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = M * v;
    v = M.transpose() * w;
    const double nv = v.norm();
    if (nv == 0.0) return 0.0;
    sigma = std::sqrt(nv);
    v /= nv;
  }
  return sigma;
}

DnRelationReport dn_relation_check(const Domain& dom, const ConductivityGen& gamma_gen) {
  const Conductivity gamma = materialize(gamma_gen, dom);
  const Potential q = gamma_to_q(dom, gamma);
  const DNMap<double> dn_q = assemble_dn(dom, q);
  const DNMap<double> dn_g = assemble_dn_conductivity(dom, gamma);

  const RealField dnu_gamma = normal_derivative(dom, gamma.values);
  const auto& bnodes = dom.boundary();
  const Eigen::Index m = static_cast<Eigen::Index>(bnodes.size());
  Eigen::VectorXd ginvsqrt(m), zeroth(m);
  for (Eigen::Index b = 0; b < m; ++b) {
    const double gb = gamma.values[bnodes[b].node];
    ginvsqrt[b] = 1.0 / std::sqrt(gb);
    zeroth[b] = 0.5 * bnodes[b].weight * dnu_gamma[b] / gb;
  }
  Eigen::MatrixXd predicted =
      ginvsqrt.asDiagonal() * dn_g.matrix * ginvsqrt.asDiagonal();
  predicted += Eigen::MatrixXd(zeroth.asDiagonal());

  DnRelationReport rep;
  rep.norm_dn = operator_norm_estimate(dn_q.matrix);
  rep.residual = operator_norm_estimate(dn_q.matrix - predicted) / rep.norm_dn;
  return rep;
}

}  // namespace cgolab
