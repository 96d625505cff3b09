#include "cgolab/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace cgolab {

double bump_profile(double t) {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

double PotentialGen::operator()(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (const auto& term : terms_) {
    switch (term.kind) {
      case PotentialTerm::Kind::Zero:
        break;
      case PotentialTerm::Kind::Constant:
        acc += term.value;
        break;
      case PotentialTerm::Kind::BallBump:
        acc += term.height * bump_profile((x - term.center).norm() / term.radius);
        break;
    }
  }
  return acc;
}

PotentialGen PotentialGen::zero() { return PotentialGen(std::vector<PotentialTerm>{}); }

PotentialGen PotentialGen::constant(double c) {
  PotentialTerm t;
  t.kind = PotentialTerm::Kind::Constant;
  t.value = c;
  return PotentialGen({t});
}

PotentialGen PotentialGen::ball_bump(const Eigen::VectorXd& center, double radius, double height) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_bump: radius must be positive");
  PotentialTerm t;
  t.kind = PotentialTerm::Kind::BallBump;
  t.center = center;
  t.radius = radius;
  t.height = height;
  return PotentialGen({t});
}

PotentialGen PotentialGen::plus(const PotentialGen& other) const {
  std::vector<PotentialTerm> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return PotentialGen(std::move(terms));
}

Potential materialize(const PotentialGen& gen, const Domain& dom) {
  Potential p;
  p.values = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) { return gen(x); });
  p.max_norm = linf_norm(p.values);
  return p;
}

Potential make_potential(const Domain& dom, const RealField& values) {
  if (values.size() != dom.num_nodes())
    throw std::invalid_argument("make_potential: field size mismatch");
  Potential p;
  p.values = values;
  p.max_norm = linf_norm(values);
  return p;
}

namespace {
std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

std::uint64_t field_hash(const RealField& v) {
  return fnv1a(reinterpret_cast<const unsigned char*>(v.data()), sizeof(double) * v.size());
}

std::uint64_t field_hash(const ComplexField& v) {
  return fnv1a(reinterpret_cast<const unsigned char*>(v.data()), 2 * sizeof(double) * v.size());
}

double ConductivityGen::operator()(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::ExpLinear:
      return std::exp(rate * x[axis]);
    case Kind::OnePlusBump:
      return 1.0 + bump.height * bump_profile((x - bump.center).norm() / bump.radius);
  }
  return 1.0;
}

Conductivity materialize(const ConductivityGen& gen, const Domain& dom) {
  Conductivity c;
  c.values = evaluate_on_grid(dom, [&](const Eigen::VectorXd& x) { return gen(x); });
  c.min_value = c.values.minCoeff();
  if (!(c.min_value > 0.0))
    throw std::invalid_argument("conductivity must be strictly positive");
  return c;
}

}  // namespace cgolab
