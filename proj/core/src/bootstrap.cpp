#include "qpgp/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qpgp/error.hpp"
#include "qpgp/parallel.hpp"

namespace qpgp {

BlockSeries resample(const BlockSeries& series, const FitResult& fit, std::uint64_t seed) {
  if (series.tail_length() != 0) {
    throw Error("bad-argument", "resampling operates on complete blocks only");
  }
  const int k = series.complete_blocks();
  const int p = series.period();
  if (k < 3) throw Error("insufficient-blocks-for-bootstrap", "need k >= 3 complete blocks");
  const double omega = fit.omega_hat;

  // Residual building blocks z_i = y_i - omega y_{i-1}, i = 2..k.
  Eigen::MatrixXd resid(p, k - 1);
  for (int i = 2; i <= k; ++i) {
    resid.col(i - 2) = series.block(i) - omega * series.block(i - 1);
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 2);

  std::vector<double> out(static_cast<std::size_t>(k) * p);
  Eigen::VectorXd y = series.block(1);
  Eigen::Map<Eigen::VectorXd>(out.data(), p) = y;  // initial block kept as observed
  for (int i = 2; i <= k; ++i) {
    y = omega * y + resid.col(pick(rng));
    Eigen::Map<Eigen::VectorXd>(out.data() + static_cast<std::size_t>(i - 1) * p, p) = y;
  }
  return BlockSeries(std::move(out), p);
}

namespace {

ParamStats column_stats(const Eigen::VectorXd& sorted_col, const Eigen::VectorXd& col,
                        double alpha) {
  const int m = static_cast<int>(col.size());
  const double mean = col.mean();
  double ss = 0.0;
  for (int i = 0; i < m; ++i) ss += (col[i] - mean) * (col[i] - mean);
  const double se = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
  // Empirical order-statistic quantiles: the ceil(q m)-th smallest value.
  const auto order_stat = [&](double q) {
    int idx = static_cast<int>(std::ceil(q * m)) - 1;
    idx = std::clamp(idx, 0, m - 1);
    return sorted_col[idx];
  };
  return {se, order_stat(alpha / 2.0), order_stat(1.0 - alpha / 2.0)};
}

}  // namespace

BootstrapSummary bootstrap_summary(const BlockSeries& series, const FitResult& fit, int m,
                                   double alpha, const FitConfig& config, std::uint64_t seed,
                                   int threads) {
  if (m < 50) throw Error("bad-argument", "need at least 50 resamples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("bad-argument", "alpha must be in (0, 1)");

  const BlockSeries complete =
      series.tail_length() == 0 ? series : series.complete_part();
  if (complete.complete_blocks() < 3) {
    throw Error("insufficient-blocks-for-bootstrap", "need k >= 3 complete blocks");
  }

  const bool parametric = config.family.has_value();
  const int dim = parametric ? 3 : 1 + complete.period();

  Eigen::MatrixXd estimates(m, dim);
  std::vector<char> ok(static_cast<std::size_t>(m), 0);
  parallel_for(m, threads, [&](int r) {
    try {
      const BlockSeries star = resample(complete, fit, seed ^ static_cast<std::uint64_t>(r));
      const FitResult refit = qpgp::fit(star, config);
      estimates(r, 0) = refit.omega_hat;
      if (parametric) {
        estimates(r, 1) = refit.theta_hat.value_or(0.0);
        estimates(r, 2) = refit.sigma2_hat.value_or(0.0);
      } else {
        for (int t = 0; t < complete.period(); ++t) {
          estimates(r, 1 + t) = refit.kernel_hat.evaluate(t);
        }
      }
      ok[static_cast<std::size_t>(r)] = 1;
    } catch (const Error&) {
      // Failed resample fits are excluded, not retried.
    }
  });

  BootstrapSummary summary;
  summary.m = m;
  summary.alpha = alpha;
  summary.low_m_warning = m < 500;

  int kept = 0;
  for (int r = 0; r < m; ++r) {
    if (ok[static_cast<std::size_t>(r)]) {
      estimates.row(kept++) = estimates.row(r);
    }
  }
  summary.failures = m - kept;
  summary.flagged = summary.failures > static_cast<int>(0.05 * m);
  if (kept == 0) throw Error("bootstrap-all-failed", "every resample fit failed");
  summary.all_estimates = estimates.topRows(kept);

  const auto stats_for = [&](int col) {
    Eigen::VectorXd v = summary.all_estimates.col(col);
    Eigen::VectorXd sorted = v;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    return column_stats(sorted, v, alpha);
  };
  summary.omega = stats_for(0);
  if (parametric) {
    summary.theta = stats_for(1);
    summary.sigma2 = stats_for(2);
  } else {
    summary.kappa.reserve(static_cast<std::size_t>(complete.period()));
    for (int t = 0; t < complete.period(); ++t) {
      summary.kappa.push_back(stats_for(1 + t));
    }
  }
  return summary;
}

}  // namespace qpgp
