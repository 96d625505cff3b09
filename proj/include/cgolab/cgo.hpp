#pragma once

#include <Eigen/Dense>
#include <memory>

#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/phases.hpp"
#include "cgolab/potential.hpp"

namespace cgolab {

// Eikonal pair (phi, psi) together with the closed-form transport amplitude
// for the exponent (sigma*phi + i*tau*psi)/h, sigma, tau in {-1, +1}.
class PhasePair {
 public:
  virtual ~PhasePair() = default;
  virtual int dim() const = 0;
  virtual double phi(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd phi_grad(const Eigen::VectorXd& x) const = 0;
  virtual double phi_lap(const Eigen::VectorXd& x) const = 0;
  virtual double psi(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd psi_grad(const Eigen::VectorXd& x) const = 0;
  virtual double psi_lap(const Eigen::VectorXd& x) const = 0;
  virtual cd amplitude(const Eigen::VectorXd& x, int sigma, int tau) const = 0;
  virtual Eigen::VectorXcd amplitude_grad(const Eigen::VectorXd& x, int sigma, int tau) const = 0;
  virtual cd amplitude_lap(const Eigen::VectorXd& x, int sigma, int tau) const = 0;
};

// log weight with the spherical-distance companion; amplitude
// (sin theta)^{-(n-2)/2} e^{i sigma tau (n-2) theta / 2}
class LogSpherePhase : public PhasePair {
 public:
  explicit LogSpherePhase(PhaseFamily fam) : fam_(std::move(fam)) {}
  const PhaseFamily& family() const { return fam_; }

  int dim() const override { return static_cast<int>(fam_.xtilde.size()); }
  double phi(const Eigen::VectorXd& x) const override { return fam_.weight.value(x); }
  Eigen::VectorXd phi_grad(const Eigen::VectorXd& x) const override { return fam_.weight.grad(x); }
  double phi_lap(const Eigen::VectorXd& x) const override { return fam_.weight.lap(x); }
  double psi(const Eigen::VectorXd& x) const override { return psi_angle(fam_, x); }
  Eigen::VectorXd psi_grad(const Eigen::VectorXd& x) const override {
    return eval_psi(fam_, x).second;
  }
  double psi_lap(const Eigen::VectorXd& x) const override { return psi_laplacian(fam_, x); }
  cd amplitude(const Eigen::VectorXd& x, int sigma, int tau) const override;
  Eigen::VectorXcd amplitude_grad(const Eigen::VectorXd& x, int sigma, int tau) const override;
  cd amplitude_lap(const Eigen::VectorXd& x, int sigma, int tau) const override;

 private:
  PhaseFamily fam_;
};

// phi = alpha.x, psi = beta.x with |alpha| = |beta|, alpha.beta = 0; a == 1
class LinearPhase : public PhasePair {
 public:
  LinearPhase(Eigen::VectorXd alpha, Eigen::VectorXd beta);
  int dim() const override { return static_cast<int>(alpha_.size()); }
  double phi(const Eigen::VectorXd& x) const override { return alpha_.dot(x); }
  Eigen::VectorXd phi_grad(const Eigen::VectorXd&) const override { return alpha_; }
  double phi_lap(const Eigen::VectorXd&) const override { return 0.0; }
  double psi(const Eigen::VectorXd& x) const override { return beta_.dot(x); }
  Eigen::VectorXd psi_grad(const Eigen::VectorXd&) const override { return beta_; }
  double psi_lap(const Eigen::VectorXd&) const override { return 0.0; }
  cd amplitude(const Eigen::VectorXd&, int, int) const override { return cd(1.0, 0.0); }
  Eigen::VectorXcd amplitude_grad(const Eigen::VectorXd&, int, int) const override {
    return Eigen::VectorXcd::Zero(alpha_.size());
  }
  cd amplitude_lap(const Eigen::VectorXd&, int, int) const override { return cd(0.0, 0.0); }

 private:
  Eigen::VectorXd alpha_, beta_;
};

// Transport operator of the conjugation identity
// e^{-Phi} P0 e^{Phi} a = h L a - h^2 Delta a,  Phi = (sigma phi + i tau psi)/h:
// L a = -[2(sigma phi' + i tau psi').grad a + (sigma lap phi + i tau lap psi) a].
// Coefficients are analytic, grad a is differenced (one-sided at the faces).
ComplexField transport_apply(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                             const ComplexField& a);

// same operator with the closed-form amplitude derivatives, evaluated pointwise
cd transport_residual_analytic(const PhasePair& phase, const Eigen::VectorXd& x, int sigma, int tau);

ComplexField amplitude_field(const Domain& dom, const PhasePair& phase, int sigma, int tau);

struct WkbReport {
  double h = 0.0;
  double raw_norm = 0.0;    // L2 of the conjugated residual over interior nodes
  double norm_ratio = 0.0;  // raw_norm / h^2
};

// conjugated residual e^{-Phi} P e^{Phi} a with discrete derivatives of a;
// a == nullptr means the closed-form amplitude
WkbReport wkb_residual(const Domain& dom, const PhasePair& phase, int sigma, int tau, double h,
                       const Potential& q, const ComplexField* a = nullptr);

struct RemainderResult {
  ComplexField r;  // remainder, zero Dirichlet trace
  ComplexField w;  // e^{i tau psi/h} r, the solved unknown
  double r_l2 = 0.0;
  double bound_constant = 0.0;  // ||r|| / h
  double cond_estimate = 0.0;
  bool semiclassical_ok = true;  // h <= 1
  bool grid_ok = true;           // h >= 5 max spacing
};

// Trace handling of the remainder solve. The solvability statement carries no
// boundary condition, so the default leaves every trace free (minimum-norm
// solution of the interior equations). PinMinus zeroes the trace where
// sigma*(phi'.nu) <= 0, the trace prescription used for the vanishing-data
// construction.
enum class RemainderTrace { Free, PinMinus };

// Discrete stand-in for the Hahn-Banach solvability argument: solves
// e^{-sigma phi/h} P e^{sigma phi/h} (e^{i tau psi/h} r) = e^{i tau psi/h} rhs
// as a minimum-norm least-squares problem, the oscillatory factor commuted
// through analytically so the discrete unknown is the smooth remainder r
// itself. rhs is given on the full lattice (interior rows used).
RemainderResult solve_remainder(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                                double h, const ComplexField& rhs, const RealField& q,
                                RemainderTrace trace = RemainderTrace::Free);

struct CGOSolution {
  const Domain* dom = nullptr;
  double h = 0.0;
  int sigma = 1;  // sign of phi in the exponent
  int tau = 1;    // orientation of psi in the exponent
  ComplexField amplitude;
  ComplexField remainder;
  ComplexField weighted;  // e^{i tau psi/h}(a + r); u = e^{sigma phi/h} * weighted
  RealField phi_values;
  RealField psi_values;
  double remainder_l2 = 0.0;
  double remainder_constant = 0.0;  // ||r||/h
  double residual_rel = 0.0;        // ||P_conj (a+r)||_L2 / ||a+r||_L2, discrete
  bool grid_ok = true;
  bool semiclassical_ok = true;

  ComplexField field() const;           // full lattice u
  ComplexField boundary_trace() const;  // one entry per boundary node
};

CGOSolution build_cgo(const Domain& dom, const PhasePair& phase, int sigma, int tau, double h,
                      const Potential& q);

// discrete conjugated operator e^{-sigma phi/h}(-h^2 Delta + h^2 q)e^{sigma phi/h}
// applied to a full-lattice field; rows at non-interior nodes are zero
ComplexField conjugated_apply(const Domain& dom, const PhasePair& phase, int sigma, double h,
                              const RealField& q, const ComplexField& w);

// same with the full complex phase (sigma phi + i tau psi)/h conjugated away
ComplexField full_conjugated_apply(const Domain& dom, const PhasePair& phase, int sigma, int tau,
                                   double h, const RealField& q, const ComplexField& r);

}  // namespace cgolab
