#pragma once

#include <Eigen/Dense>

#include "qpgp/kernel.hpp"

namespace qpgp {

/// p x p within-period covariance matrix with cached Cholesky factor and
/// log-determinant. Immutable after construction.
///
/// If the raw matrix is numerically singular (the cosine kernel has rank at
/// most 2), a ridge of eps * (trace/p) is added with eps escalating from
/// 1e-10 to 1e-6 in decade steps; the applied amount is recorded in jitter().
/// matrix() returns the effective (jittered) matrix, which the cached factor
/// reproduces.
class BlockCov {
 public:
  explicit BlockCov(const PeriodicKernel& kernel);
  explicit BlockCov(Eigen::MatrixXd symmetric);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  const Eigen::MatrixXd& chol() const { return chol_; }  // lower triangular
  double logdet() const { return logdet_; }
  double jitter() const { return jitter_; }

  /// Forward substitution L z = x, so that quad forms are squared norms.
  Eigen::VectorXd half_solve(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Columnwise forward substitution.
  Eigen::MatrixXd half_solve_cols(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  /// x^T K^{-1} x
  double quad(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// x^T K^{-1} y
  double bilinear(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// K^{-1} B
  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const;
  Eigen::MatrixXd inverse() const;

  // Leading principal submatrices K_m share the leading m x m block of the
  // Cholesky factor, so no refactorization is needed.
  double leading_logdet(int m) const;
  double leading_quad(int m, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double leading_bilinear(int m, const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  void factorize();

  Eigen::MatrixXd mat_;
  Eigen::MatrixXd chol_;
  double logdet_ = 0.0;
  double jitter_ = 0.0;
};

}  // namespace qpgp
