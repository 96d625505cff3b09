#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"

namespace cgolab {

// Analytic potential descriptors; they are re-evaluated when the grid is
// refined, so convergence studies always sample the same function.
struct PotentialTerm {
  enum class Kind { Zero, Constant, BallBump };
  Kind kind = Kind::Zero;
  double value = 0.0;  // Constant
  Eigen::VectorXd center;
  double radius = 0.0;
  double height = 0.0;
};

class PotentialGen {
 public:
  PotentialGen() = default;
  explicit PotentialGen(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {}
  double operator()(const Eigen::VectorXd& x) const;
  const std::vector<PotentialTerm>& terms() const { return terms_; }

  static PotentialGen zero();
  static PotentialGen constant(double c);
  static PotentialGen ball_bump(const Eigen::VectorXd& center, double radius, double height);
  PotentialGen plus(const PotentialGen& other) const;

 private:
  std::vector<PotentialTerm> terms_;
};

// smooth compactly supported profile: height * exp(1 - 1/(1 - t^2)), t = |x-c|/rho
double bump_profile(double t);

struct Potential {
  RealField values;
  double max_norm = 0.0;
};

Potential materialize(const PotentialGen& gen, const Domain& dom);
Potential make_potential(const Domain& dom, const RealField& values);

std::uint64_t field_hash(const RealField& v);
std::uint64_t field_hash(const ComplexField& v);

// strictly positive conductivity
struct ConductivityGen {
  enum class Kind { One, ExpLinear, OnePlusBump };
  Kind kind = Kind::One;
  double rate = 0.0;  // ExpLinear: gamma = exp(rate * x[axis])
  int axis = 0;
  PotentialTerm bump;  // OnePlusBump
  double operator()(const Eigen::VectorXd& x) const;
};

struct Conductivity {
  RealField values;
  double min_value = 0.0;
};

// throws if gamma <= 0 at any node
Conductivity materialize(const ConductivityGen& gen, const Domain& dom);

}  // namespace cgolab
