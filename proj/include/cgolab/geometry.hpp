#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgolab {

class CarlemanWeight;  // weights.hpp

// One boundary lattice node. Corner and edge nodes are assigned to exactly
// one face (lowest touching axis index wins), so node/normal/weight triples
// enumerate the boundary without double counting.
struct BoundaryNode {
  Eigen::Index node = -1;  // flat lattice index
  int face_axis = -1;
  int face_side = 0;  // 0 = low face, 1 = high face
  Eigen::VectorXd normal;
  double weight = 0.0;  // product-trapezoid surface weight
};

// Axis-aligned box discretized with points_per_axis nodes per axis.
// Immutable after construction; all queries are const.
class Domain {
 public:
  Domain(int dim, Eigen::VectorXd lo, Eigen::VectorXd hi, int points_per_axis);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  const Eigen::VectorXd& spacing() const { return spacing_; }
  double max_spacing() const { return spacing_.maxCoeff(); }

  Eigen::Index num_nodes() const { return num_nodes_; }

  Eigen::Index flat(const Eigen::VectorXi& idx) const {
    Eigen::Index f = 0;
    for (int k = 0; k < dim_; ++k) f = f * n_ + idx[k];
    return f;
  }
  Eigen::VectorXi multi(Eigen::Index flat_idx) const {
    Eigen::VectorXi idx(dim_);
    for (int k = dim_ - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(flat_idx % n_);
      flat_idx /= n_;
    }
    return idx;
  }
  Eigen::VectorXd point(const Eigen::VectorXi& idx) const {
    Eigen::VectorXd x(dim_);
    for (int k = 0; k < dim_; ++k) x[k] = lo_[k] + spacing_[k] * idx[k];
    return x;
  }
  Eigen::VectorXd point(Eigen::Index flat_idx) const { return point(multi(flat_idx)); }

  bool is_interior(const Eigen::VectorXi& idx) const {
    for (int k = 0; k < dim_; ++k)
      if (idx[k] == 0 || idx[k] == n_ - 1) return false;
    return true;
  }
  bool is_interior(Eigen::Index flat_idx) const { return interior_pos_[flat_idx] >= 0; }

  const std::vector<BoundaryNode>& boundary() const { return boundary_; }
  // position of a node in boundary(), or -1
  int boundary_pos(Eigen::Index node) const { return boundary_pos_[node]; }
  const std::vector<Eigen::Index>& interior_nodes() const { return interior_; }
  // position of a node in interior_nodes(), or -1
  Eigen::Index interior_pos(Eigen::Index node) const { return interior_pos_[node]; }

  // trapezoid volume weight of a node
  double volume_weight(Eigen::Index flat_idx) const;

  double boundary_area() const;

  bool strictly_outside_box(const Eigen::VectorXd& x) const;

 private:
  int dim_ = 0;
  int n_ = 0;
  Eigen::VectorXd lo_, hi_, spacing_;
  Eigen::Index num_nodes_ = 0;
  std::vector<BoundaryNode> boundary_;
  std::vector<int> boundary_pos_;
  std::vector<Eigen::Index> interior_;
  std::vector<Eigen::Index> interior_pos_;
};

Domain build_box_domain(int dim, const std::vector<std::pair<double, double>>& bounds,
                        int points_per_axis);

// Boundary index sets; entries are positions into Domain::boundary().
// front/back follow (0.5); the signed sets use +-nu.phi' >= 0 and may share
// the zero set, while minus_eps/plus_eps split at nu.phi' < eps0 / >= eps0
// and always partition the boundary.
struct BoundaryPartition {
  std::vector<int> front, back;
  std::vector<int> signed_minus, signed_plus;
  std::vector<int> minus_eps, plus_eps;
  double eps0 = 0.0;
};

BoundaryPartition partition_front_back(const Domain& dom, const Eigen::VectorXd& x0);
BoundaryPartition partition_signed(const Domain& dom, const CarlemanWeight& weight, double eps0);

// CSV export: node_index, x..., nu..., set_label. Labels come from whichever
// sets the partition carries (front/back when nonempty, else minus/plus_eps).
std::string partition_to_csv(const Domain& dom, const BoundaryPartition& part);

std::string domain_to_json(const Domain& dom);

}  // namespace cgolab
