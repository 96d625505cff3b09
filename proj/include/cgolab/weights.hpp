#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "cgolab/geometry.hpp"
#include "cgolab/rng.hpp"

namespace cgolab {

class WeightImpl {
 public:
  virtual ~WeightImpl() = default;
  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hess(const Eigen::VectorXd& x) const = 0;
  virtual double lap(const Eigen::VectorXd& x) const { return hess(x).trace(); }
  virtual std::string kind() const = 0;
};

// Value handle over a concrete weight. Immutable and cheap to copy.
class CarlemanWeight {
 public:
  CarlemanWeight() = default;
  explicit CarlemanWeight(std::shared_ptr<const WeightImpl> impl) : impl_(std::move(impl)) {}

  int dim() const { return impl_->dim(); }
  double value(const Eigen::VectorXd& x) const { return impl_->value(x); }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const { return impl_->grad(x); }
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const { return impl_->hess(x); }
  double lap(const Eigen::VectorXd& x) const { return impl_->lap(x); }
  std::string kind() const { return impl_->kind(); }
  bool valid() const { return impl_ != nullptr; }

 private:
  std::shared_ptr<const WeightImpl> impl_;
};

// phi = alpha.x with |alpha| = 1 (alpha is normalized here)
CarlemanWeight linear_weight(const Eigen::VectorXd& alpha);
// phi = ln|x - x0|
CarlemanWeight log_weight(const Eigen::VectorXd& x0);
// phi = |x|^2, not a limiting weight; negative-control only
CarlemanWeight quadratic_weight(int dim);
// phi_eps = phi + eps*phi^2/2; rejects eps outside (0, 0.5] and sign changes
// of 1 + eps*phi over the domain nodes
CarlemanWeight convexify(const CarlemanWeight& w, double eps, const Domain& dom);

// throws if |phi'| vanishes (< tol) at any grid node
void require_nonvanishing_gradient(const CarlemanWeight& w, const Domain& dom, double tol = 1e-12);

// Conjugated Weyl symbols a = xi^2 - phi'^2, b = 2 phi'.xi
struct ConjugatedSymbols {
  CarlemanWeight weight;
  double a(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    const Eigen::VectorXd g = weight.grad(x);
    return xi.squaredNorm() - g.squaredNorm();
  }
  double b(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    return 2.0 * weight.grad(x).dot(xi);
  }
};

// {a,b} = 4 (xi^T phi'' xi + phi'^T phi'' phi')
double poisson_bracket(const CarlemanWeight& w, const Eigen::VectorXd& x, const Eigen::VectorXd& xi);

// Characteristic covector at x: |xi| = |phi'(x)|, xi orthogonal to phi'(x).
// Deterministic Gram-Schmidt completion of phi'/|phi'|; the direction inside
// the orthogonal complement is drawn from rng.
Eigen::VectorXd characteristic_xi(const CarlemanWeight& w, const Eigen::VectorXd& x, Rng& rng);

struct LimitingReport {
  std::string weight_kind;
  int samples = 0;
  double max_bracket = 0.0;
  double tol = 0.0;
  bool pass = false;
};

LimitingReport check_limiting(const CarlemanWeight& w, const Domain& dom, int samples, double tol,
                              Rng& rng);

}  // namespace cgolab
