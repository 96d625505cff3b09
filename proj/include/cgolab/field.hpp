#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cgolab/geometry.hpp"

namespace cgolab {

using cd = std::complex<double>;
template <class Scalar>
using Field = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RealField = Field<double>;
using ComplexField = Field<cd>;

// d/dx_axis, second order: central in the interior, one-sided 3-point on the
// lattice faces.
template <class Scalar>
Field<Scalar> derivative(const Domain& dom, const Field<Scalar>& u, int axis) {
  const int n = dom.points_per_axis();
  const double d = dom.spacing()[axis];
  Field<Scalar> out = Field<Scalar>::Zero(u.size());
  Eigen::Index stride = 1;
  for (int k = dom.dim() - 1; k > axis; --k) stride *= n;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const int i = dom.multi(f)[axis];
    if (i == 0) {
      out[f] = (Scalar(-3.0) * u[f] + Scalar(4.0) * u[f + stride] - u[f + 2 * stride]) / (2.0 * d);
    } else if (i == n - 1) {
      out[f] = (Scalar(3.0) * u[f] - Scalar(4.0) * u[f - stride] + u[f - 2 * stride]) / (2.0 * d);
    } else {
      out[f] = (u[f + stride] - u[f - stride]) / (2.0 * d);
    }
  }
  return out;
}

template <class Scalar>
std::vector<Field<Scalar>> gradient(const Domain& dom, const Field<Scalar>& u) {
  std::vector<Field<Scalar>> g;
  g.reserve(dom.dim());
  for (int k = 0; k < dom.dim(); ++k) g.push_back(derivative(dom, u, k));
  return g;
}

// Laplacian, second order: (2n+1)-point stencil in the interior, one-sided
// 4-point second derivatives on the lattice faces.
template <class Scalar>
Field<Scalar> laplacian(const Domain& dom, const Field<Scalar>& u) {
  const int n = dom.points_per_axis();
  Field<Scalar> out = Field<Scalar>::Zero(u.size());
  for (int axis = 0; axis < dom.dim(); ++axis) {
    const double d2 = dom.spacing()[axis] * dom.spacing()[axis];
    Eigen::Index stride = 1;
    for (int k = dom.dim() - 1; k > axis; --k) stride *= n;
    for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
      const int i = dom.multi(f)[axis];
      if (i == 0) {
        out[f] += (Scalar(2.0) * u[f] - Scalar(5.0) * u[f + stride] + Scalar(4.0) * u[f + 2 * stride] -
                   u[f + 3 * stride]) /
                  d2;
      } else if (i == n - 1) {
        out[f] += (Scalar(2.0) * u[f] - Scalar(5.0) * u[f - stride] + Scalar(4.0) * u[f - 2 * stride] -
                   u[f - 3 * stride]) /
                  d2;
      } else {
        out[f] += (u[f + stride] - Scalar(2.0) * u[f] + u[f - stride]) / d2;
      }
    }
  }
  return out;
}

// Outward normal derivative at every boundary node, second-order one-sided
// along the assigned face axis. Returns one value per Domain::boundary() entry.
template <class Scalar>
Field<Scalar> normal_derivative(const Domain& dom, const Field<Scalar>& u) {
  const int n = dom.points_per_axis();
  const auto& bnodes = dom.boundary();
  Field<Scalar> out(static_cast<Eigen::Index>(bnodes.size()));
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const auto& bn = bnodes[b];
    const int axis = bn.face_axis;
    const double d = dom.spacing()[axis];
    Eigen::Index stride = 1;
    for (int k = dom.dim() - 1; k > axis; --k) stride *= n;
    const Eigen::Index in = bn.face_side == 1 ? -stride : stride;  // one step inward
    out[b] = (Scalar(3.0) * u[bn.node] - Scalar(4.0) * u[bn.node + in] + u[bn.node + 2 * in]) / (2.0 * d);
  }
  return out;
}

template <class Scalar>
Scalar integrate(const Domain& dom, const Field<Scalar>& u) {
  Scalar acc{};
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) acc += Scalar(dom.volume_weight(f)) * u[f];
  return acc;
}

template <class Scalar>
double l2_norm(const Domain& dom, const Field<Scalar>& u) {
  double acc = 0.0;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) acc += dom.volume_weight(f) * std::norm(cd(u[f]));
  return std::sqrt(acc);
}

// L2 over interior nodes only (uniform cell weight prod(spacing))
template <class Scalar>
double l2_interior(const Domain& dom, const Field<Scalar>& u) {
  double cell = 1.0;
  for (int k = 0; k < dom.dim(); ++k) cell *= dom.spacing()[k];
  double acc = 0.0;
  for (Eigen::Index f : dom.interior_nodes()) acc += cell * std::norm(cd(u[f]));
  return std::sqrt(acc);
}

template <class Scalar>
double linf_norm(const Field<Scalar>& u) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) m = std::max(m, std::abs(cd(u[i])));
  return m;
}

// integral over a boundary subset; vals has one entry per boundary node
template <class Scalar>
Scalar boundary_integral(const Domain& dom, const Field<Scalar>& vals, const std::vector<int>& subset) {
  Scalar acc{};
  for (int b : subset) acc += Scalar(dom.boundary()[b].weight) * vals[b];
  return acc;
}

template <class Scalar>
double boundary_l2(const Domain& dom, const Field<Scalar>& vals, const std::vector<int>& subset) {
  double acc = 0.0;
  for (int b : subset) acc += dom.boundary()[b].weight * std::norm(cd(vals[b]));
  return std::sqrt(acc);
}

// pointwise evaluation of an analytic function on the lattice
template <class F>
auto evaluate_on_grid(const Domain& dom, F&& fn) -> Field<decltype(fn(Eigen::VectorXd()))> {
  using S = decltype(fn(Eigen::VectorXd()));
  Field<S> out(dom.num_nodes());
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) out[f] = fn(dom.point(f));
  return out;
}

}  // namespace cgolab
