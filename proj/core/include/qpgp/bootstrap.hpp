#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "qpgp/estimator.hpp"
#include "qpgp/process.hpp"

namespace qpgp {

struct ParamStats {
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct BootstrapSummary {
  int m = 0;  // requested resample count
  double alpha = 0.05;
  ParamStats omega;
  std::optional<ParamStats> theta;   // parametric fits
  std::optional<ParamStats> sigma2;  // parametric fits
  std::vector<ParamStats> kappa;     // general fits: per lag 0..p-1
  /// Retained resample estimates, one row per successful resample. Column 0
  /// is omega; the rest are (theta, sigma2) or kappa lags.
  Eigen::MatrixXd all_estimates;
  int failures = 0;
  bool flagged = false;        // more than 5% of resample fits failed
  bool low_m_warning = false;  // m below 500
};

/// Model-based residual resample: residuals z_i = y_i - omega_hat y_{i-1} for
/// i = 2..k are drawn with replacement, the first block is kept as observed,
/// and the series is regenerated through the recursion with omega_hat.
/// Deterministic given seed. Requires complete blocks and k >= 3.
BlockSeries resample(const BlockSeries& series, const FitResult& fit, std::uint64_t seed);

/// Runs m independent resample -> refit cycles (per-cycle seeds derived as
/// seed ^ index) and summarizes standard errors and empirical quantile
/// confidence intervals. Partial tails are dropped before resampling. Failed
/// resample fits are excluded, not retried, and counted in failures.
BootstrapSummary bootstrap_summary(const BlockSeries& series, const FitResult& fit, int m,
                                   double alpha, const FitConfig& config, std::uint64_t seed,
                                   int threads = 1);

}  // namespace qpgp
