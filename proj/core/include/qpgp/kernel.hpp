#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

namespace qpgp {

struct MacKayForm {
  double theta;
  double sigma2;
};

struct MaternForm {
  double nu;  // one of 0.5, 1.5, 2.5
  double theta;
  double sigma2;
};

struct CosineForm {
  int iota;
  double sigma2;
};

struct TabulatedForm {
  std::vector<double> values;  // lags 0..p-1
};

/// Even periodic covariance kernel with integer period p.
///
/// Parametric forms evaluate their closed expression at any lag. Tabulated
/// kernels store lags 0..p-1; other lags are derived by evenness first
/// (kappa(-t) = kappa(t)) and then reduction of |t| modulo p.
class PeriodicKernel {
 public:
  using Form = std::variant<MacKayForm, MaternForm, CosineForm, TabulatedForm>;

  static PeriodicKernel mackay(int period, double theta, double sigma2);
  static PeriodicKernel matern(int period, double nu, double theta, double sigma2);
  static PeriodicKernel cosine(int period, int iota, double sigma2);

  /// Validates positive semidefiniteness of the implied circulant extension:
  /// the discrete spectrum over the 2p-1 lags must be >= -1e-10 * max|value|.
  static PeriodicKernel tabulated(int period, std::vector<double> values);

  int period() const { return period_; }
  const Form& form() const { return form_; }
  bool is_tabulated() const { return std::holds_alternative<TabulatedForm>(form_); }
  std::string form_name() const;  // "mackay" | "matern" | "cosine" | "tabulated"

  /// Covariance at integer lag t.
  double evaluate(long t) const;

  /// Variance of the periodic building block, evaluate(0).
  double variance() const { return evaluate(0); }

 private:
  PeriodicKernel(int period, Form form) : period_(period), form_(std::move(form)) {}

  int period_;
  Form form_;
};

/// Eigenvalues of the (2p-1)-point circulant implied by the even extension of
/// `values` (lags 0..p-1): s_j = v0 + 2 * sum_t v_t cos(2 pi t j / (2p-1)).
Eigen::VectorXd circulant_spectrum(const std::vector<double>& values);

/// Projects an even lag sequence kappa(0..p-1) onto the cone of sequences
/// whose spectrum f(lambda) = (1/2pi) sum_{|t|<p} kappa(t) e^{-i t lambda}
/// is non-negative. Each pass clips the spectrum at zero on a dense grid of
/// max(4096, 8p) points over [-pi, pi] and inverse-transforms by trapezoid
/// quadrature; passes repeat until the truncated spectrum itself is
/// non-negative, so the result is a fixed point (re-projecting returns the
/// input unchanged). Inputs with an already non-negative spectrum pass
/// through exactly.
PeriodicKernel spectral_project(int period, const std::vector<double>& kappa);

enum class KernelForm { MacKay, Matern, Cosine };

/// Parametric family used by the projection stage of the estimator and the
/// grid-search baseline.
struct ParametricFamily {
  KernelForm form = KernelForm::MacKay;
  double nu = 1.5;  // Matern smoothness, fixed per family
  // theta search grid for frobenius_project: log-spaced coarse points on
  // [theta_min, theta_max] followed by two golden-section refinement passes.
  double theta_min = 0.05;
  double theta_max = 10.0;
  int coarse_points = 64;

  PeriodicKernel make(int period, double theta, double sigma2) const;
  std::string name() const;
};

struct FrobeniusFit {
  PeriodicKernel kernel;
  double theta;   // iota for the cosine family
  double sigma2;
  double residual;  // Frobenius norm of target - K(theta, sigma2)
};

/// Least-squares projection of a symmetric target matrix onto a parametric
/// kernel family: for each candidate theta the scale sigma2 is the closed-form
/// coefficient <target, B(theta)>_F / <B(theta), B(theta)>_F (clamped
/// positive) with B the unit-variance kernel matrix.
FrobeniusFit frobenius_project(const Eigen::MatrixXd& target, const ParametricFamily& family);

}  // namespace qpgp
