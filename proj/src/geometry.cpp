#include "cgolab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cgolab/weights.hpp"

namespace cgolab {

Domain::Domain(int dim, Eigen::VectorXd lo, Eigen::VectorXd hi, int points_per_axis)
    : dim_(dim), n_(points_per_axis), lo_(std::move(lo)), hi_(std::move(hi)) {
  if (dim_ < 2) throw std::invalid_argument("Domain: dim must be >= 2");
  if (n_ < 5) throw std::invalid_argument("Domain: points_per_axis must be >= 5");
  if (lo_.size() != dim_ || hi_.size() != dim_)
    throw std::invalid_argument("Domain: bounds size mismatch");
  spacing_.resize(dim_);
  for (int k = 0; k < dim_; ++k) {
    const double side = hi_[k] - lo_[k];
    if (!(side > 0.0)) throw std::invalid_argument("Domain: degenerate bounds");
    spacing_[k] = side / (n_ - 1);
  }
  num_nodes_ = 1;
  for (int k = 0; k < dim_; ++k) num_nodes_ *= n_;

  boundary_pos_.assign(num_nodes_, -1);
  interior_pos_.assign(num_nodes_, -1);
  for (Eigen::Index f = 0; f < num_nodes_; ++f) {
    const Eigen::VectorXi idx = multi(f);
    int face_axis = -1;
    for (int k = 0; k < dim_; ++k) {
      if (idx[k] == 0 || idx[k] == n_ - 1) {
        face_axis = k;
        break;  // lowest axis index wins
      }
    }
    if (face_axis < 0) {
      interior_pos_[f] = static_cast<Eigen::Index>(interior_.size());
      interior_.push_back(f);
      continue;
    }
    BoundaryNode bn;
    bn.node = f;
    bn.face_axis = face_axis;
    bn.face_side = idx[face_axis] == 0 ? 0 : 1;
    bn.normal = Eigen::VectorXd::Zero(dim_);
    bn.normal[face_axis] = bn.face_side == 0 ? -1.0 : 1.0;
    bn.weight = 1.0;
    for (int j = 0; j < dim_; ++j) {
      if (j == face_axis) continue;
      double w = spacing_[j];
      if (idx[j] == 0 || idx[j] == n_ - 1) w *= 0.5;
      bn.weight *= w;
    }
    boundary_pos_[f] = static_cast<int>(boundary_.size());
    boundary_.push_back(std::move(bn));
  }
}

double Domain::volume_weight(Eigen::Index flat_idx) const {
  const Eigen::VectorXi idx = multi(flat_idx);
  double w = 1.0;
  for (int k = 0; k < dim_; ++k) {
    double s = spacing_[k];
    if (idx[k] == 0 || idx[k] == n_ - 1) s *= 0.5;
    w *= s;
  }
  return w;
}

double Domain::boundary_area() const {
  double a = 0.0;
  for (const auto& bn : boundary_) a += bn.weight;
  return a;
}

bool Domain::strictly_outside_box(const Eigen::VectorXd& x) const {
  for (int k = 0; k < dim_; ++k)
    if (x[k] < lo_[k] || x[k] > hi_[k]) return true;
  return false;
}

Domain build_box_domain(int dim, const std::vector<std::pair<double, double>>& bounds,
                        int points_per_axis) {
  if (dim < 2) throw std::invalid_argument("build_box_domain: dim must be >= 2");
  if (static_cast<int>(bounds.size()) != dim)
    throw std::invalid_argument("build_box_domain: bounds size mismatch");
  Eigen::VectorXd lo(dim), hi(dim);
  for (int k = 0; k < dim; ++k) {
    lo[k] = bounds[k].first;
    hi[k] = bounds[k].second;
  }
  return Domain(dim, lo, hi, points_per_axis);
}

BoundaryPartition partition_front_back(const Domain& dom, const Eigen::VectorXd& x0) {
  if (!dom.strictly_outside_box(x0))
    throw std::invalid_argument("partition_front_back: x0 must lie strictly outside the convex hull");
  BoundaryPartition part;
  const auto& bnodes = dom.boundary();
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const Eigen::VectorXd x = dom.point(bnodes[b].node);
    const double s = (x - x0).dot(bnodes[b].normal);
    if (s <= 0.0)
      part.front.push_back(static_cast<int>(b));
    else
      part.back.push_back(static_cast<int>(b));
  }
  return part;
}

BoundaryPartition partition_signed(const Domain& dom, const CarlemanWeight& weight, double eps0) {
  if (eps0 < 0.0) throw std::invalid_argument("partition_signed: eps0 must be >= 0");
  BoundaryPartition part;
  part.eps0 = eps0;
  const auto& bnodes = dom.boundary();
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    const Eigen::VectorXd x = dom.point(bnodes[b].node);
    const Eigen::VectorXd g = weight.grad(x);
    if (g.norm() < 1e-12)
      throw std::invalid_argument("partition_signed: weight gradient vanishes at a boundary node");
    const double s = bnodes[b].normal.dot(g);
    if (s <= 0.0) part.signed_minus.push_back(static_cast<int>(b));
    if (s >= 0.0) part.signed_plus.push_back(static_cast<int>(b));
    // strict on the zero set: nu.phi' = 0 always lands in minus_eps
    if (s < eps0 || s <= 0.0)
      part.minus_eps.push_back(static_cast<int>(b));
    else
      part.plus_eps.push_back(static_cast<int>(b));
  }
  return part;
}

std::string partition_to_csv(const Domain& dom, const BoundaryPartition& part) {
  const auto& bnodes = dom.boundary();
  std::vector<std::string> label(bnodes.size());
  if (!part.front.empty() || !part.back.empty()) {
    for (int b : part.front) label[b] = "front";
    for (int b : part.back) label[b] = "back";
  } else {
    for (int b : part.minus_eps) label[b] = "minus_eps";
    for (int b : part.plus_eps) label[b] = "plus_eps";
  }
  std::ostringstream os;
  os << "node_index";
  for (int k = 0; k < dom.dim(); ++k) os << ",x" << k;
  for (int k = 0; k < dom.dim(); ++k) os << ",nu" << k;
  os << ",set_label\n";
  char buf[64];
  for (std::size_t b = 0; b < bnodes.size(); ++b) {
    os << bnodes[b].node;
    const Eigen::VectorXd x = dom.point(bnodes[b].node);
    for (int k = 0; k < dom.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", x[k]);
      os << buf;
    }
    for (int k = 0; k < dom.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", bnodes[b].normal[k]);
      os << buf;
    }
    os << "," << label[b] << "\n";
  }
  return os.str();
}

std::string domain_to_json(const Domain& dom) {
  std::ostringstream os;
  char buf[64];
  os << "{\"dim\":" << dom.dim() << ",\"bounds\":[";
  for (int k = 0; k < dom.dim(); ++k) {
    if (k) os << ",";
    std::snprintf(buf, sizeof(buf), "[%.17g,%.17g]", dom.lo()[k], dom.hi()[k]);
    os << buf;
  }
  os << "],\"points_per_axis\":" << dom.points_per_axis() << "}";
  return os.str();
}

}  // namespace cgolab
