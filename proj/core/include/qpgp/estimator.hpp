#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "qpgp/kernel.hpp"
#include "qpgp/process.hpp"

namespace qpgp {

struct FitConfig {
  double delta = 1e-6;  // threshold on max(|d/d omega|, |d/d K|_inf)
  int max_iters = 500;
  std::optional<ParametricFamily> family;  // set: parametric Stage II
  std::uint64_t seed = 0;
  bool track_objective = false;  // record the reduced objective after each sweep
};

struct Stage1Result {
  double omega_tilde = 0.0;
  Eigen::MatrixXd k_tilde;
  int iters = 0;
  double final_grad = 0.0;
  bool converged = false;
  double jitter_applied = 0.0;
  std::vector<double> objective_trace;
};

struct FitResult {
  double omega_hat = 0.0;
  PeriodicKernel kernel_hat;
  double stage1_omega = 0.0;
  Eigen::MatrixXd stage1_k;
  int iters = 0;
  double final_grad_norm = 0.0;
  bool converged = false;
  double reduced_nll = 0.0;
  double jitter_applied = 0.0;
  std::optional<double> theta_hat;   // parametric Stage II only
  std::optional<double> sigma2_hat;  // parametric Stage II only
  std::optional<double> eipse;
  std::vector<double> objective_trace;
};

/// Stage I: alternating minimization of the reduced objective over
/// (omega, K), starting from K = I. The omega update is the ratio of
/// quadratic forms, the K update the residual outer-product average; with a
/// partial tail the four-quantity update cycle (omega, K_l, K_{p-l,l},
/// K_{(p-l).l}) runs in that order each sweep. omega is clamped to
/// [-omega_max, omega_max] after each update.
Stage1Result stage1(const BlockSeries& series, const FitConfig& config);

/// Stage II: projects the Stage-I matrix onto valid periodic kernels
/// (Toeplitz diagonal averaging plus spectral clipping, or the parametric
/// Frobenius fit when config.family is set) and recomputes omega against the
/// projected matrix.
FitResult stage2(const Eigen::MatrixXd& k_tilde, const BlockSeries& series,
                 const FitConfig& config);

/// stage1 followed by stage2, with diagnostics carried through.
FitResult fit(const BlockSeries& series, const FitConfig& config = {});

struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

struct MleGridResult {
  double omega = 0.0;
  double theta = 0.0;
  double sigma2 = 0.0;
  double nll = 0.0;
  long evaluations = 0;
};

/// Exhaustive minimization of the block likelihood over the Cartesian grid.
/// The baseline the two-stage estimator is compared against; deliberately
/// evaluates the full likelihood at every grid point.
MleGridResult mle_grid(const BlockSeries& series, const GridRange& omega,
                       const GridRange& theta, const GridRange& sigma2,
                       const ParametricFamily& family);

namespace detail {
// Complete-block and partial-tail Stage-I paths, exposed so tests can check
// that the partial path with l = 0 degenerates exactly to the complete one.
Stage1Result stage1_complete(const BlockSeries& series, const FitConfig& config);
Stage1Result stage1_partial(const BlockSeries& series, const FitConfig& config);
}  // namespace detail

}  // namespace qpgp
