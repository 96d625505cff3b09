#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "cgolab/geometry.hpp"
#include "cgolab/weights.hpp"

namespace cgolab {

// Parameters theta = (y, xtilde, nu) of the limit phase f(x; theta).
// y is a unit vector, nu a nonzero tangent vector at y.
struct Theta {
  Eigen::VectorXd y;
  Eigen::VectorXd xtilde;
  Eigen::VectorXd nu;
};

// The log weight phi = ln|x - xtilde| paired with the spherical-distance
// companion psi(x) = arccos(<omega, y>), omega = (x - xtilde)/|x - xtilde|.
struct PhaseFamily {
  CarlemanWeight weight;  // log kind, center xtilde
  Eigen::VectorXd xtilde;
  Eigen::VectorXd y;
  Eigen::VectorXd nu;
  double delta = 0.05;  // antipodal guard in radians

  Theta theta() const { return Theta{y, xtilde, nu}; }
};

// rejects non-unit y, non-tangent or zero nu
PhaseFamily make_phase_family(const Eigen::VectorXd& xtilde, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& nu, double delta = 0.05);

// geodesic exponential on the unit sphere
Eigen::VectorXd sphere_exp(const Eigen::VectorXd& y, const Eigen::VectorXd& v);

// angle theta(x) = arccos(<omega, y>); throws on x == xtilde or when the
// configuration violates the antipodal guard
double psi_angle(const PhaseFamily& fam, const Eigen::VectorXd& x);

// value and x-gradient of psi; |grad psi| = 1/|x - xtilde|
std::pair<double, Eigen::VectorXd> eval_psi(const PhaseFamily& fam, const Eigen::VectorXd& x);

// closed-form Hessian of psi (verified against finite differences in tests)
Eigen::MatrixXd psi_hessian(const PhaseFamily& fam, const Eigen::VectorXd& x);

// Laplacian of psi: (n-2) cot(theta) / r^2
double psi_laplacian(const PhaseFamily& fam, const Eigen::VectorXd& x);

struct EikonalReport {
  double max_norm_residual = 0.0;  // max | |psi'|^2 - |phi'|^2 |
  double max_orth_residual = 0.0;  // max | psi'.phi' |
  bool pass = false;
  double tol = 0.0;
};

EikonalReport verify_eikonal_pair(const PhaseFamily& fam, const Domain& dom, double tol);

// psi(x) = g((x - xtilde)/|x - xtilde|) extended 0-homogeneously to the cone
// over the patch W = {dir : <dir, axis> >= cos(half_angle)}.
class HomogeneousExtension {
 public:
  HomogeneousExtension(std::function<double(const Eigen::VectorXd&)> g, Eigen::VectorXd xtilde,
                       Eigen::VectorXd patch_axis, double patch_half_angle);

  double value(const Eigen::VectorXd& x) const;  // throws if direction leaves W
  // gradient by finite differences on the sphere patch (g is a black box)
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const;

 private:
  std::function<double(const Eigen::VectorXd&)> g_;
  Eigen::VectorXd xtilde_, axis_;
  double cos_half_angle_;
};

// f(x; theta) = psi'_y . nu = -<omega, nu> / sqrt(1 - <omega, y>^2)
std::pair<double, Eigen::VectorXd> eval_f(const Eigen::VectorXd& x, const Theta& theta,
                                          double delta = 0.05);

// true when nu is (numerically) parallel to the geodesic arrival direction at
// x, i.e. f'_x(x) degenerates (pf.8 kernel direction)
bool nu_degenerate_at(const Eigen::VectorXd& x, const Theta& theta, double tol = 1e-8);

struct RankReport {
  int expected_ny = 0;    // n-1
  int expected_full = 0;  // n
  int min_rank_ny = 0;
  int min_rank_full = 0;
  double min_gap_ny = 0.0;    // sigma_{rank}/sigma_{rank+1} worst case
  double min_gap_full = 0.0;  // over samples with a trailing singular value
  int samples_ok_ny = 0;
  int samples_ok_full = 0;
  int samples = 0;
};

// finite-difference mixed Hessians f''_{x,(y,nu)} (n x 2(n-1)) and
// f''_{x,theta} (n x (3n-2)) at each sample; ranks via SVD with relative
// threshold 1e-6
RankReport check_rank(const Theta& theta, const std::vector<Eigen::VectorXd>& samples,
                      double fd_step = 1e-5);

// gradient of f in theta coordinates (2(n-1) + n entries), central differences
Eigen::VectorXd f_theta_gradient(const Eigen::VectorXd& x, const Theta& theta, double fd_step = 1e-5);

struct InjectivityReport {
  double min_ratio = 0.0;  // min over pairs of |f'_theta(x1)-f'_theta(x2)| / |x1-x2|
  int pairs = 0;
};

InjectivityReport injectivity_probe(const Theta& theta,
                                    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs);

}  // namespace cgolab
