#include "qpgp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpgp/block_cov.hpp"
#include "qpgp/error.hpp"
#include "qpgp/likelihood.hpp"

namespace qpgp {

namespace {

void check_config(const FitConfig& config) {
  if (!(config.delta > 0.0)) throw Error("bad-config", "delta must be positive");
  if (config.max_iters < 1) throw Error("bad-config", "max_iters must be >= 1");
}

double clamp_omega(double omega) {
  if (!std::isfinite(omega)) return 0.0;
  return std::clamp(omega, -kOmegaMax, kOmegaMax);
}

// Ratio-of-quadratic-forms omega update; the partial tail contributes its own
// terms through the leading l x l submatrix.
struct OmegaParts {
  double cross = 0.0;  // sum y_i' K^{-1} y_{i+1} (+ tail cross)
  double self = 0.0;   // sum y_i' K^{-1} y_i (+ tail self)
};

OmegaParts omega_parts(const BlockSeries& series, const BlockCov& cov) {
  const int k = series.complete_blocks();
  const int l = series.tail_length();
  Eigen::MatrixXd w = cov.half_solve_cols(series.block_matrix());
  OmegaParts parts;
  for (int i = 0; i + 1 < k; ++i) {
    parts.cross += w.col(i).dot(w.col(i + 1));
    parts.self += w.col(i).squaredNorm();
  }
  if (l >= 1) {
    parts.cross += cov.leading_bilinear(l, series.block_head(k, l), series.block_head(k + 1, l));
    parts.self += cov.leading_quad(l, series.block_head(k, l));
  }
  return parts;
}

Eigen::MatrixXd residual_matrix(const BlockSeries& series, double omega) {
  const int k = series.complete_blocks();
  const int p = series.period();
  Eigen::MatrixXd r(p, k - 1);
  const auto y = series.block_matrix();
  for (int i = 0; i + 1 < k; ++i) r.col(i) = y.col(i + 1) - omega * y.col(i);
  return r;
}

struct SweepState {
  double omega = 0.0;
  Eigen::MatrixXd k;
};

Stage1Result run_stage1(const BlockSeries& series, const FitConfig& config, bool partial_algebra) {
  check_config(config);
  const int k = series.complete_blocks();
  const int p = series.period();
  const int l = series.tail_length();
  if (k < 2) throw Error("insufficient-blocks", "stage I needs at least two complete blocks");

  Stage1Result res;
  res.k_tilde = Eigen::MatrixXd::Identity(p, p);
  double max_jitter = 0.0;

  SweepState prev{std::numeric_limits<double>::quiet_NaN(), res.k_tilde};
  BlockCov cov(res.k_tilde);

  for (int m = 1; m <= config.max_iters; ++m) {
    res.iters = m;

    const OmegaParts parts = omega_parts(series, cov);
    const double omega = clamp_omega(parts.self > 0.0 ? parts.cross / parts.self : 0.0);

    const Eigen::MatrixXd resid = residual_matrix(series, omega);
    Eigen::MatrixXd k_new;
    if (!partial_algebra) {
      k_new = resid * resid.transpose() / (k - 1);
    } else {
      // Four-quantity cycle: K_l (k-term average including the tail
      // residual), then the cross block through the regression coefficient,
      // then the Schur complement, recombined into the full matrix.
      const Eigen::VectorXd tail_resid =
          series.block_head(k + 1, l) - omega * series.block_head(k, l);
      const auto resid_l = resid.topRows(l);
      const auto resid_rest = resid.bottomRows(p - l);

      Eigen::MatrixXd k_l =
          (resid_l * resid_l.transpose() + tail_resid * tail_resid.transpose()) / k;
      const Eigen::MatrixXd s_ll = resid_l * resid_l.transpose() / (k - 1);
      const Eigen::MatrixXd c_rl = resid_rest * resid_l.transpose() / (k - 1);

      Eigen::MatrixXd b(p - l, l);
      if (l > 0) {
        BlockCov s_ll_cov{Eigen::MatrixXd(s_ll)};
        max_jitter = std::max(max_jitter, s_ll_cov.jitter());
        b = s_ll_cov.solve(c_rl.transpose()).transpose();
      }
      const Eigen::MatrixXd centered = resid_rest - b * resid_l;
      const Eigen::MatrixXd schur = centered * centered.transpose() / (k - 1);

      k_new.resize(p, p);
      k_new.topLeftCorner(l, l) = k_l;
      k_new.topRightCorner(l, p - l) = (b * k_l).transpose();
      k_new.bottomLeftCorner(p - l, l) = b * k_l;
      k_new.bottomRightCorner(p - l, p - l) = schur + b * k_l * b.transpose();
      k_new = ((k_new + k_new.transpose()) / 2.0).eval();
    }

    cov = BlockCov(k_new);
    max_jitter = std::max(max_jitter, cov.jitter());

    // Stopping rule of the alternating scheme: after the K update the matrix
    // stationarity residual is zero by construction, so the criterion is the
    // omega derivative at the fresh iterate.
    const OmegaParts check = omega_parts(series, cov);
    const double grad_omega = (omega * check.self - check.cross) / (k - 1);
    res.final_grad = std::abs(grad_omega);
    res.omega_tilde = omega;
    res.k_tilde = cov.matrix();

    if (config.track_objective) {
      res.objective_trace.push_back(nll_reduced(series, omega, cov).value);
    }

    if (res.final_grad < config.delta) {
      res.converged = true;
      break;
    }
    // Stalled at the omega clamp: the iterate is a boundary fixed point that
    // the gradient criterion will never accept.
    const double scale = std::max(1.0, prev.k.cwiseAbs().maxCoeff());
    if (omega == prev.omega && (cov.matrix() - prev.k).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
      break;
    }
    prev = {omega, cov.matrix()};
  }

  res.jitter_applied = max_jitter;
  return res;
}

}  // namespace

namespace detail {

Stage1Result stage1_complete(const BlockSeries& series, const FitConfig& config) {
  if (series.tail_length() != 0) {
    throw Error("bad-argument", "complete-block path requires l = 0");
  }
  return run_stage1(series, config, false);
}

Stage1Result stage1_partial(const BlockSeries& series, const FitConfig& config) {
  // Runs the four-quantity cycle even when l = 0; the empty tail blocks make
  // it coincide with the complete path exactly.
  return run_stage1(series, config, true);
}

}  // namespace detail

Stage1Result stage1(const BlockSeries& series, const FitConfig& config) {
  return run_stage1(series, config, series.tail_length() != 0);
}

FitResult stage2(const Eigen::MatrixXd& k_tilde, const BlockSeries& series,
                 const FitConfig& config) {
  const int p = series.period();
  if (k_tilde.rows() != p || k_tilde.cols() != p) {
    throw Error("bad-argument", "stage II matrix must be p x p");
  }

  FitResult res{.kernel_hat = PeriodicKernel::mackay(1, 1.0, 1.0)};
  if (config.family) {
    const FrobeniusFit projected = frobenius_project(k_tilde, *config.family);
    res.kernel_hat = projected.kernel;
    res.theta_hat = projected.theta;
    res.sigma2_hat = projected.sigma2;
  } else {
    // Toeplitz diagonal averaging, then the spectral non-negativity
    // projection.
    std::vector<double> kappa(static_cast<std::size_t>(p));
    for (int t = 0; t < p; ++t) {
      double s = 0.0;
      for (int j = 0; j + t < p; ++j) s += k_tilde(j, j + t);
      kappa[static_cast<std::size_t>(t)] = s / (p - t);
    }
    res.kernel_hat = spectral_project(p, kappa);
  }

  BlockCov cov_hat(res.kernel_hat);
  const OmegaParts parts = omega_parts(series, cov_hat);
  res.omega_hat = clamp_omega(parts.self > 0.0 ? parts.cross / parts.self : 0.0);
  res.stage1_k = k_tilde;
  res.reduced_nll = nll_reduced(series, res.omega_hat, cov_hat).value;
  res.jitter_applied = cov_hat.jitter();
  return res;
}

FitResult fit(const BlockSeries& series, const FitConfig& config) {
  const Stage1Result s1 = stage1(series, config);
  FitResult res = stage2(s1.k_tilde, series, config);
  res.stage1_omega = s1.omega_tilde;
  res.iters = s1.iters;
  res.final_grad_norm = s1.final_grad;
  res.converged = s1.converged;
  res.jitter_applied = std::max(res.jitter_applied, s1.jitter_applied);
  res.objective_trace = s1.objective_trace;
  return res;
}

namespace {

std::vector<double> grid_points(const GridRange& g) {
  if (!(g.step > 0.0) || !(g.hi >= g.lo)) {
    throw Error("bad-search-spec", "grid needs lo <= hi and positive step");
  }
  std::vector<double> pts;
  for (double v = g.lo; v <= g.hi + 1e-12 * g.step; v += g.step) pts.push_back(v);
  if (pts.empty()) throw Error("bad-search-spec", "empty grid");
  return pts;
}

}  // namespace

MleGridResult mle_grid(const BlockSeries& series, const GridRange& omega, const GridRange& theta,
                       const GridRange& sigma2, const ParametricFamily& family) {
  if (series.tail_length() != 0) {
    throw Error("partial-block-unsupported-block", "grid MLE requires complete blocks");
  }
  const auto omegas = grid_points(omega);
  const auto thetas = grid_points(theta);
  const auto sigmas = grid_points(sigma2);

  MleGridResult best;
  best.nll = std::numeric_limits<double>::infinity();
  long evals = 0;
  for (const double th : thetas) {
    for (const double s2 : sigmas) {
      const BlockCov cov{family.make(series.period(), th, s2)};
      for (const double om : omegas) {
        const double v = nll_block_at(series, clamp_omega(om), cov);
        ++evals;
        if (v < best.nll) {
          best.omega = om;
          best.theta = th;
          best.sigma2 = s2;
          best.nll = v;
        }
      }
    }
  }
  best.evaluations = evals;
  return best;
}

}  // namespace qpgp
