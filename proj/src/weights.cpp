#include "cgolab/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace cgolab {

namespace {

class LinearWeight : public WeightImpl {
 public:
  explicit LinearWeight(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
    const double n = alpha_.norm();
    if (n < 1e-14) throw std::invalid_argument("linear_weight: alpha must be nonzero");
    alpha_ /= n;
  }
  int dim() const override { return static_cast<int>(alpha_.size()); }
  double value(const Eigen::VectorXd& x) const override { return alpha_.dot(x); }
  Eigen::VectorXd grad(const Eigen::VectorXd&) const override { return alpha_; }
  Eigen::MatrixXd hess(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Zero(alpha_.size(), alpha_.size());
  }
  double lap(const Eigen::VectorXd&) const override { return 0.0; }
  std::string kind() const override { return "linear"; }

 private:
  Eigen::VectorXd alpha_;
};

class LogWeight : public WeightImpl {
 public:
  explicit LogWeight(Eigen::VectorXd x0) : x0_(std::move(x0)) {}
  int dim() const override { return static_cast<int>(x0_.size()); }
  double value(const Eigen::VectorXd& x) const override {
    const double r = (x - x0_).norm();
    if (r < 1e-300) throw std::domain_error("log_weight: evaluation at the center");
    return std::log(r);
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd d = x - x0_;
    const double r2 = d.squaredNorm();
    if (r2 < 1e-300) throw std::domain_error("log_weight: evaluation at the center");
    return d / r2;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd d = x - x0_;
    const double r2 = d.squaredNorm();
    const int n = dim();
    return Eigen::MatrixXd::Identity(n, n) / r2 - 2.0 * (d * d.transpose()) / (r2 * r2);
  }
  double lap(const Eigen::VectorXd& x) const override {
    return (dim() - 2.0) / (x - x0_).squaredNorm();
  }
  std::string kind() const override { return "log"; }

 private:
  Eigen::VectorXd x0_;
};

class QuadraticWeight : public WeightImpl {
 public:
  explicit QuadraticWeight(int n) : n_(n) {}
  int dim() const override { return n_; }
  double value(const Eigen::VectorXd& x) const override { return x.squaredNorm(); }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override { return 2.0 * x; }
  Eigen::MatrixXd hess(const Eigen::VectorXd&) const override {
    return 2.0 * Eigen::MatrixXd::Identity(n_, n_);
  }
  double lap(const Eigen::VectorXd&) const override { return 2.0 * n_; }
  std::string kind() const override { return "quadratic"; }

 private:
  int n_;
};

class ConvexifiedWeight : public WeightImpl {
 public:
  ConvexifiedWeight(CarlemanWeight base, double eps) : base_(std::move(base)), eps_(eps) {}
  int dim() const override { return base_.dim(); }
  double value(const Eigen::VectorXd& x) const override {
    const double p = base_.value(x);
    return p + eps_ * p * p / 2.0;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override {
    return (1.0 + eps_ * base_.value(x)) * base_.grad(x);
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd g = base_.grad(x);
    return (1.0 + eps_ * base_.value(x)) * base_.hess(x) + eps_ * (g * g.transpose());
  }
  std::string kind() const override { return "convexified_" + base_.kind(); }

 private:
  CarlemanWeight base_;
  double eps_;
};

}  // namespace

CarlemanWeight linear_weight(const Eigen::VectorXd& alpha) {
  return CarlemanWeight(std::make_shared<LinearWeight>(alpha));
}

CarlemanWeight log_weight(const Eigen::VectorXd& x0) {
  return CarlemanWeight(std::make_shared<LogWeight>(x0));
}

CarlemanWeight quadratic_weight(int dim) {
  return CarlemanWeight(std::make_shared<QuadraticWeight>(dim));
}

CarlemanWeight convexify(const CarlemanWeight& w, double eps, const Domain& dom) {
  if (!(eps > 0.0) || eps > 0.5)
    throw std::invalid_argument("convexify: eps must lie in (0, 0.5]");
  bool seen_pos = false, seen_neg = false;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const double s = 1.0 + eps * w.value(dom.point(f));
    if (s > 0.0) seen_pos = true;
    if (s < 0.0) seen_neg = true;
    if (s == 0.0 || (seen_pos && seen_neg))
      throw std::invalid_argument("convexify: 1 + eps*phi changes sign on the domain");
  }
  return CarlemanWeight(std::make_shared<ConvexifiedWeight>(w, eps));
}

void require_nonvanishing_gradient(const CarlemanWeight& w, const Domain& dom, double tol) {
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    if (w.grad(dom.point(f)).norm() < tol)
      throw std::invalid_argument("weight gradient vanishes on the domain (node " +
                                  std::to_string(f) + ")");
  }
}

double poisson_bracket(const CarlemanWeight& w, const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
  const Eigen::MatrixXd H = w.hess(x);
  const Eigen::VectorXd g = w.grad(x);
  return 4.0 * (xi.dot(H * xi) + g.dot(H * g));
}

Eigen::VectorXd characteristic_xi(const CarlemanWeight& w, const Eigen::VectorXd& x, Rng& rng) {
  const Eigen::VectorXd g = w.grad(x);
  const double gn = g.norm();
  if (gn < 1e-12)
    throw std::runtime_error("characteristic_xi: zero gradient, cannot build xi");
  const int n = static_cast<int>(g.size());
  // orthonormal basis of g-perp by Gram-Schmidt over the seed basis e_0..e_{n-1}
  std::vector<Eigen::VectorXd> basis;
  basis.push_back(g / gn);
  for (int k = 0; k < n && static_cast<int>(basis.size()) < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, k);
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double vn = v.norm();
    if (vn > 1e-8) basis.push_back(v / vn);
  }
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 1; j < basis.size(); ++j) dir += rng.normal() * basis[j];
  double dn = dir.norm();
  if (dn < 1e-12) {
    dir = basis[1];
    dn = 1.0;
  }
  return (gn / dn) * dir;
}

LimitingReport check_limiting(const CarlemanWeight& w, const Domain& dom, int samples, double tol,
                              Rng& rng) {
  if (samples < 1) throw std::invalid_argument("check_limiting: samples must be >= 1");
  require_nonvanishing_gradient(w, dom, 1e-12);
  LimitingReport rep;
  rep.weight_kind = w.kind();
  rep.samples = samples;
  rep.tol = tol;
  double max_abs = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = rng.point_in_box(dom.lo(), dom.hi());
    const Eigen::VectorXd xi = characteristic_xi(w, x, rng);
    max_abs = std::max(max_abs, std::abs(poisson_bracket(w, x, xi)));
  }
  rep.max_bracket = max_abs;
  rep.pass = max_abs <= tol;
  return rep;
}

}  // namespace cgolab
