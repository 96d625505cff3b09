#include "cgolab/phases.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace cgolab {

namespace {

// orthonormal tangent basis at unit vector y
std::vector<Eigen::VectorXd> tangent_basis(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  std::vector<Eigen::VectorXd> basis;
  basis.push_back(y);
  for (int k = 0; k < n && static_cast<int>(basis.size()) < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, k);
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double vn = v.norm();
    if (vn > 1e-8) basis.push_back(v / vn);
  }
  basis.erase(basis.begin());
  return basis;
}

struct OmegaData {
  Eigen::VectorXd omega;
  double r;
};

OmegaData omega_of(const Eigen::VectorXd& x, const Eigen::VectorXd& xtilde) {
  Eigen::VectorXd d = x - xtilde;
  const double r = d.norm();
  if (r < 1e-14) throw std::domain_error("phase: x coincides with xtilde");
  return {d / r, r};
}

double guarded_cos(const Eigen::VectorXd& omega, const Eigen::VectorXd& y, double delta) {
  const double c = omega.dot(y);
  if (c >= std::cos(delta) || c <= std::cos(M_PI - delta))
    throw std::domain_error("phase: configuration violates the antipodal guard");
  return c;
}

}  // namespace

PhaseFamily make_phase_family(const Eigen::VectorXd& xtilde, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& nu, double delta) {
  if (std::abs(y.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("make_phase_family: y must be a unit vector");
  if (nu.norm() < 1e-14) throw std::invalid_argument("make_phase_family: nu must be nonzero");
  if (std::abs(nu.dot(y)) > 1e-10 * nu.norm())
    throw std::invalid_argument("make_phase_family: nu must be tangent at y");
  PhaseFamily fam;
  fam.weight = log_weight(xtilde);
  fam.xtilde = xtilde;
  fam.y = y;
  fam.nu = nu;
  fam.delta = delta;
  return fam;
}

Eigen::VectorXd sphere_exp(const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
  const double t = v.norm();
  if (t < 1e-300) return y;
  return std::cos(t) * y + std::sin(t) * (v / t);
}

double psi_angle(const PhaseFamily& fam, const Eigen::VectorXd& x) {
  const OmegaData od = omega_of(x, fam.xtilde);
  return std::acos(guarded_cos(od.omega, fam.y, fam.delta));
}

std::pair<double, Eigen::VectorXd> eval_psi(const PhaseFamily& fam, const Eigen::VectorXd& x) {
  const OmegaData od = omega_of(x, fam.xtilde);
  const double c = guarded_cos(od.omega, fam.y, fam.delta);
  const double s = std::sqrt(1.0 - c * c);
  const Eigen::VectorXd p = fam.y - c * od.omega;
  return {std::acos(c), -p / (od.r * s)};
}

Eigen::MatrixXd psi_hessian(const PhaseFamily& fam, const Eigen::VectorXd& x) {
  const OmegaData od = omega_of(x, fam.xtilde);
  const double c = guarded_cos(od.omega, fam.y, fam.delta);
  const double s = std::sqrt(1.0 - c * c);
  const Eigen::VectorXd& w = od.omega;
  const Eigen::VectorXd p = fam.y - c * w;
  const double r2 = od.r * od.r;
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H = (w * p.transpose() + p * w.transpose() +
                       c * (Eigen::MatrixXd::Identity(n, n) - w * w.transpose())) /
                      (r2 * s);
  H -= (c / (r2 * s * s * s)) * (p * p.transpose());
  return H;
}

double psi_laplacian(const PhaseFamily& fam, const Eigen::VectorXd& x) {
  const OmegaData od = omega_of(x, fam.xtilde);
  const double c = guarded_cos(od.omega, fam.y, fam.delta);
  const double s = std::sqrt(1.0 - c * c);
  const int n = static_cast<int>(x.size());
  return (n - 2) * (c / s) / (od.r * od.r);
}

EikonalReport verify_eikonal_pair(const PhaseFamily& fam, const Domain& dom, double tol) {
  EikonalReport rep;
  rep.tol = tol;
  for (Eigen::Index f = 0; f < dom.num_nodes(); ++f) {
    const Eigen::VectorXd x = dom.point(f);
    const auto [val, gpsi] = eval_psi(fam, x);
    (void)val;
    const Eigen::VectorXd gphi = fam.weight.grad(x);
    rep.max_norm_residual =
        std::max(rep.max_norm_residual, std::abs(gpsi.squaredNorm() - gphi.squaredNorm()));
    rep.max_orth_residual = std::max(rep.max_orth_residual, std::abs(gpsi.dot(gphi)));
  }
  rep.pass = rep.max_norm_residual <= tol && rep.max_orth_residual <= tol;
  return rep;
}

HomogeneousExtension::HomogeneousExtension(std::function<double(const Eigen::VectorXd&)> g,
                                           Eigen::VectorXd xtilde, Eigen::VectorXd patch_axis,
                                           double patch_half_angle)
    : g_(std::move(g)), xtilde_(std::move(xtilde)), axis_(patch_axis.normalized()),
      cos_half_angle_(std::cos(patch_half_angle)) {}

double HomogeneousExtension::value(const Eigen::VectorXd& x) const {
  const OmegaData od = omega_of(x, xtilde_);
  if (od.omega.dot(axis_) < cos_half_angle_ - 1e-12)
    throw std::domain_error("HomogeneousExtension: direction outside the patch W");
  return g_(od.omega);
}

Eigen::VectorXd HomogeneousExtension::grad(const Eigen::VectorXd& x) const {
  const OmegaData od = omega_of(x, xtilde_);
  if (od.omega.dot(axis_) < cos_half_angle_ - 1e-12)
    throw std::domain_error("HomogeneousExtension: direction outside the patch W");
  const int n = static_cast<int>(x.size());
  const double eps = 1e-6;
  Eigen::VectorXd g(n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd vp = od.omega + eps * Eigen::VectorXd::Unit(n, k);
    Eigen::VectorXd vm = od.omega - eps * Eigen::VectorXd::Unit(n, k);
    g[k] = (g_(vp.normalized()) - g_(vm.normalized())) / (2.0 * eps);
  }
  return g / od.r;
}

std::pair<double, Eigen::VectorXd> eval_f(const Eigen::VectorXd& x, const Theta& theta,
                                          double delta) {
  if (theta.nu.norm() < 1e-14) throw std::invalid_argument("eval_f: nu must be nonzero");
  if (std::abs(theta.nu.dot(theta.y)) > 1e-8 * theta.nu.norm())
    throw std::invalid_argument("eval_f: nu must be tangent at y");
  const OmegaData od = omega_of(x, theta.xtilde);
  const double c = guarded_cos(od.omega, theta.y, delta);
  const double s = std::sqrt(1.0 - c * c);
  const double u = od.omega.dot(theta.nu);
  const double value = -u / s;
  const Eigen::VectorXd p = theta.y - c * od.omega;
  Eigen::VectorXd grad = -(theta.nu - u * od.omega) / (od.r * s) - (u * c / (od.r * s * s * s)) * p;
  return {value, grad};
}

bool nu_degenerate_at(const Eigen::VectorXd& x, const Theta& theta, double tol) {
  const auto [val, grad] = eval_f(x, theta);
  (void)val;
  const double r = (x - theta.xtilde).norm();
  // |f'_x| scales like |nu|/r for generic nu
  return grad.norm() * r / theta.nu.norm() < tol;
}

namespace {

// local chart around theta: y(s) on the sphere, nu(s, c) projected tangent,
// xtilde translated; used by all finite-difference derivatives in theta
struct ThetaChart {
  Theta base;
  std::vector<Eigen::VectorXd> tb;  // tangent basis at base.y

  explicit ThetaChart(const Theta& t) : base(t), tb(tangent_basis(t.y)) {}

  int n() const { return static_cast<int>(base.y.size()); }
  int params_ynu() const { return 2 * (n() - 1); }
  int params_full() const { return 3 * n() - 2; }

  Theta at(const Eigen::VectorXd& p) const {
    const int m = n() - 1;
    Eigen::VectorXd y = base.y;
    for (int i = 0; i < m; ++i) y += p[i] * tb[i];
    y.normalize();
    Eigen::VectorXd nu = base.nu;
    for (int i = 0; i < m; ++i) nu += p[m + i] * tb[i];
    nu -= nu.dot(y) * y;
    Eigen::VectorXd xt = base.xtilde;
    if (p.size() >= 3 * n() - 2)
      for (int i = 0; i < n(); ++i) xt[i] += p[2 * m + i];
    return Theta{y, xt, nu};
  }
};

}  // namespace

RankReport check_rank(const Theta& theta, const std::vector<Eigen::VectorXd>& samples,
                      double fd_step) {
  if (samples.empty()) throw std::invalid_argument("check_rank: need at least one sample");
  const ThetaChart chart(theta);
  const int n = chart.n();
  RankReport rep;
  rep.expected_ny = n - 1;
  rep.expected_full = n;
  rep.samples = static_cast<int>(samples.size());
  rep.min_rank_ny = n;
  rep.min_rank_full = n;
  rep.min_gap_ny = std::numeric_limits<double>::infinity();
  rep.min_gap_full = std::numeric_limits<double>::infinity();

  auto rank_of = [](const Eigen::MatrixXd& M, int expected, int& rank, double& gap) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd sv = svd.singularValues();
    const double thresh = 1e-6 * sv[0];
    rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > thresh) ++rank;
    if (expected < sv.size() && sv[expected] > 0.0)
      gap = sv[expected - 1] / sv[expected];
    else
      gap = sv[expected - 1] / (1e-15 * sv[0]);
  };

  for (const auto& x : samples) {
    const int m_ny = chart.params_ynu();
    const int m_full = chart.params_full();
    Eigen::MatrixXd M_full(n, m_full);
    for (int j = 0; j < m_full; ++j) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(m_full);
      p[j] = fd_step;
      const Eigen::VectorXd gp = eval_f(x, chart.at(p)).second;
      p[j] = -fd_step;
      const Eigen::VectorXd gm = eval_f(x, chart.at(p)).second;
      M_full.col(j) = (gp - gm) / (2.0 * fd_step);
    }
    const Eigen::MatrixXd M_ny = M_full.leftCols(m_ny);

    int rank_ny = 0, rank_full = 0;
    double gap_ny = 0.0, gap_full = 0.0;
    rank_of(M_ny, rep.expected_ny, rank_ny, gap_ny);
    rank_of(M_full, rep.expected_full, rank_full, gap_full);
    rep.min_rank_ny = std::min(rep.min_rank_ny, rank_ny);
    rep.min_rank_full = std::min(rep.min_rank_full, rank_full);
    rep.min_gap_ny = std::min(rep.min_gap_ny, gap_ny);
    rep.min_gap_full = std::min(rep.min_gap_full, gap_full);
    if (rank_ny == rep.expected_ny) ++rep.samples_ok_ny;
    if (rank_full == rep.expected_full) ++rep.samples_ok_full;
  }
  return rep;
}

Eigen::VectorXd f_theta_gradient(const Eigen::VectorXd& x, const Theta& theta, double fd_step) {
  const ThetaChart chart(theta);
  const int m = chart.params_full();
  Eigen::VectorXd g(m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    p[j] = fd_step;
    const double fp = eval_f(x, chart.at(p)).first;
    p[j] = -fd_step;
    const double fm = eval_f(x, chart.at(p)).first;
    g[j] = (fp - fm) / (2.0 * fd_step);
  }
  return g;
}

InjectivityReport injectivity_probe(
    const Theta& theta, const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
  InjectivityReport rep;
  rep.pairs = static_cast<int>(pairs.size());
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [x1, x2] : pairs) {
    const double dist = (x1 - x2).norm();
    if (dist < 1e-14) continue;
    const double diff = (f_theta_gradient(x1, theta) - f_theta_gradient(x2, theta)).norm();
    rep.min_ratio = std::min(rep.min_ratio, diff / dist);
  }
  return rep;
}

}  // namespace cgolab
