#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgolab/geometry.hpp"
#include "cgolab/rng.hpp"
#include "cgolab/weights.hpp"

using namespace cgolab;

namespace {
Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}
}  // namespace

TEST_CASE("box domain node counts") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 9);
  CHECK(dom.num_nodes() == 729);
  CHECK(static_cast<int>(dom.boundary().size()) == 386);
  CHECK(static_cast<int>(dom.interior_nodes().size()) == 343);

  const Domain dom2 = build_box_domain(2, {{0, 1}, {0, 1}}, 5);
  CHECK(static_cast<int>(dom2.boundary().size()) == 16);
  CHECK(static_cast<int>(dom2.interior_nodes().size()) == 9);
}

TEST_CASE("degenerate domains are rejected") {
  CHECK_THROWS(build_box_domain(1, {{0, 1}}, 9));
  CHECK_THROWS(build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 2));
  CHECK_THROWS(build_box_domain(3, {{0, 1}, {1, 1}, {0, 1}}, 9));
}

TEST_CASE("normals are unit and unique per boundary node") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 2}, {0, 1}}, 7);
  for (const auto& bn : dom.boundary()) {
    CHECK(bn.normal.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bn.face_axis >= 0);
  }
}

TEST_CASE("surface weights sum to the boundary area within the corner deficit") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 9);
  const double area = dom.boundary_area();
  // cube area 6; the shared-edge assignment drops at most ~2*spacing*perimeter
  const double deficit_bound = 2.0 * dom.max_spacing() * 12.0;
  CHECK(area <= 6.0 + 1e-12);
  CHECK(area >= 6.0 - deficit_bound);
}

TEST_CASE("front/back partition of the cube") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 9);
  const BoundaryPartition part = partition_front_back(dom, vec3(-1.0, 0.5, 0.5));
  CHECK(part.front.size() + part.back.size() == dom.boundary().size());
  for (int b : part.front) {
    const auto& bn = dom.boundary()[b];
    if (bn.face_axis == 0) CHECK(bn.face_side == 0);  // x1 = 0 face is in front
    CHECK(bn.face_axis == 0);  // all other faces have (x-x0).nu > 0 for this x0
  }
  // face x2 = 0 has nu = (0,-1,0) and (x-x0).nu = 0.5 > 0: back
  for (int b : part.back) {
    const auto& bn = dom.boundary()[b];
    const bool is_front_face = bn.face_axis == 0 && bn.face_side == 0;
    CHECK_FALSE(is_front_face);
  }
}

TEST_CASE("x0 inside or on the hull is rejected") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 5);
  CHECK_THROWS(partition_front_back(dom, vec3(0.5, 0.5, 0.5)));
  CHECK_THROWS(partition_front_back(dom, vec3(0.0, 0.5, 0.5)));
}

TEST_CASE("signed partition for a linear weight picks the aligned face") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 7);
  const CarlemanWeight w = linear_weight(vec3(1, 0, 0));
  const BoundaryPartition part = partition_signed(dom, w, 0.0);
  for (int b : part.plus_eps) {
    const auto& bn = dom.boundary()[b];
    CHECK(bn.face_axis == 0);
    CHECK(bn.face_side == 1);
  }
  // eps0 above max|phi'| empties the plus set
  const BoundaryPartition part2 = partition_signed(dom, w, 2.0);
  CHECK(part2.plus_eps.empty());
  CHECK(part2.minus_eps.size() == dom.boundary().size());
}

TEST_CASE("log-weight signed partition coincides with front/back") {
  const Domain dom = build_box_domain(3, {{0, 1}, {0, 1}, {0, 1}}, 9);
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x0(3);
    // random center outside the hull, pushed away from face planes
    const int axis = static_cast<int>(rng.next_u64() % 3);
    const bool below = rng.uniform01() < 0.5;
    for (int k = 0; k < 3; ++k) x0[k] = rng.uniform(-0.4, 1.4);
    x0[axis] = below ? rng.uniform(-2.0, -0.3) : rng.uniform(1.3, 3.0);
    const double eps0 = rng.uniform(0.0, 0.5);

    const CarlemanWeight w = log_weight(x0);
    const BoundaryPartition sp = partition_signed(dom, w, eps0);
    CHECK(sp.minus_eps.size() + sp.plus_eps.size() == dom.boundary().size());
    CHECK(sp.signed_minus.size() + sp.signed_plus.size() >= dom.boundary().size());

    const BoundaryPartition fb = partition_front_back(dom, x0);
    const BoundaryPartition sp0 = partition_signed(dom, w, 0.0);
    // node-by-node: plus_eps(0) = B(x0) because nu.phi' and (x-x0).nu share sign
    std::vector<char> in_back(dom.boundary().size(), 0);
    for (int b : fb.back) in_back[b] = 1;
    for (int b : sp0.plus_eps) CHECK(in_back[b] == 1);
    CHECK(sp0.plus_eps.size() == fb.back.size());
  }
}

TEST_CASE("partition csv export carries labels") {
  const Domain dom = build_box_domain(2, {{0, 1}, {0, 1}}, 5);
  const BoundaryPartition part = partition_front_back(dom, vec3(-2, 0.5, 0).head(2));
  const std::string csv = partition_to_csv(dom, part);
  CHECK(csv.find("node_index") != std::string::npos);
  CHECK(csv.find("front") != std::string::npos);
  CHECK(csv.find("back") != std::string::npos);
}

TEST_CASE("domain json descriptor") {
  const Domain dom = build_box_domain(2, {{0, 1}, {-1, 2}}, 6);
  const std::string j = domain_to_json(dom);
  CHECK(j.find("\"dim\":2") != std::string::npos);
  CHECK(j.find("\"points_per_axis\":6") != std::string::npos);
}
