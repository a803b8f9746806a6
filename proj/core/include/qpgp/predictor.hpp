#pragma once

#include <vector>

#include "qpgp/estimator.hpp"
#include "qpgp/process.hpp"

namespace qpgp {

/// One-step-ahead best linear predictions for t = 2..n (index 0 holds t = 2).
///
/// predictor_var is Var(Yhat_t), the variance of the projection itself;
/// var_hat is the prediction error variance Var(Y_t - Yhat_t), which drives
/// the 95% intervals yhat +- 1.96 sqrt(var_hat).
struct PredictionTrace {
  std::vector<double> y_hat;
  std::vector<double> var_hat;
  std::vector<double> predictor_var;
  std::vector<double> lo95;
  std::vector<double> hi95;
  double eipse = 0.0;
  bool from_converged_fit = true;
};

/// Blockwise predictor: all leading principal factors of K come from one
/// Cholesky, so each step costs at most O(p^2).
PredictionTrace predict_fast(const BlockSeries& series, const QpgpModel& model);

/// Dense baseline: conditions on the full history through Sigma_{t-1}.
/// One dense factorization plus growing solves; O(n^3) overall.
PredictionTrace predict_naive(const BlockSeries& series, const QpgpModel& model);

/// predict_fast with plug-in estimates. For general (tabulated) kernel fits
/// the EIPSE sum discards the initial periodic block.
PredictionTrace predict_plugin(const BlockSeries& series, const FitResult& fit);

/// (1/n) sum over t in [first_t, n] of (y_t - yhat_t)^2, with yhat indexed
/// from t = 2.
double eipse_of(const BlockSeries& series, const std::vector<double>& y_hat, long first_t = 2);

}  // namespace qpgp
