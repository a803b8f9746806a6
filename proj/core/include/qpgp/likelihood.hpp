#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qpgp/block_cov.hpp"
#include "qpgp/process.hpp"

namespace qpgp {

struct LikelihoodValue {
  double value = 0.0;
  std::optional<double> grad_omega;           // d value / d omega
  std::optional<Eigen::MatrixXd> grad_cov;    // d value / d K, entrywise
};

/// Negative log-likelihood through the dense n x n covariance, built
/// entrywise and factored by dense Cholesky. O(n^3); the benchmark baseline.
/// Requires a standard-init model and complete blocks (l = 0).
LikelihoodValue nll_naive(const BlockSeries& series, const QpgpModel& model);

/// Same value as nll_naive, evaluated blockwise through the cached p x p
/// factor in O(k p^2). Requires standard init and l = 0.
LikelihoodValue nll_block(const BlockSeries& series, const QpgpModel& model);

/// Blockwise likelihood against a prebuilt factorization; the grid-search
/// baseline evaluates this at every grid point.
double nll_block_at(const BlockSeries& series, double omega, const BlockCov& cov);

/// Scaled reduced negative log-likelihood (the Stage-I objective): omits the
/// initial-block marginal. With a partial tail (l >= 1) the tail contributes
/// its own log-determinant and quadratic form through the leading l x l
/// principal submatrix of K. Needs k >= 2.
LikelihoodValue nll_reduced(const BlockSeries& series, double omega, const BlockCov& cov,
                            bool with_gradients = false);

}  // namespace qpgp
