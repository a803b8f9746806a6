#include "qpgp/predictor.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "qpgp/error.hpp"

namespace qpgp {

namespace {

constexpr double kZ95 = 1.96;

void reserve_trace(PredictionTrace& trace, long n) {
  const std::size_t m = static_cast<std::size_t>(n - 1);
  trace.y_hat.reserve(m);
  trace.var_hat.reserve(m);
  trace.predictor_var.reserve(m);
  trace.lo95.reserve(m);
  trace.hi95.reserve(m);
}

void push_step(PredictionTrace& trace, double y_hat, double err_var, double pred_var) {
  err_var = std::max(err_var, 0.0);
  const double half = kZ95 * std::sqrt(err_var);
  trace.y_hat.push_back(y_hat);
  trace.var_hat.push_back(err_var);
  trace.predictor_var.push_back(pred_var);
  trace.lo95.push_back(y_hat - half);
  trace.hi95.push_back(y_hat + half);
}

}  // namespace

double eipse_of(const BlockSeries& series, const std::vector<double>& y_hat, long first_t) {
  const long n = series.n();
  double sum = 0.0;
  for (long t = std::max<long>(2, first_t); t <= n; ++t) {
    const double d = series.value(t) - y_hat[static_cast<std::size_t>(t - 2)];
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

PredictionTrace predict_fast(const BlockSeries& series, const QpgpModel& model) {
  if (!model.standard_init()) throw Error("bad-argument", "prediction requires standard init");
  if (series.period() != model.period()) {
    throw Error("bad-argument", "series and model period differ");
  }
  const long n = series.n();
  if (n < 2) throw Error("bad-argument", "need at least two samples");
  const int p = model.period();
  const double omega = model.omega();
  const double denom = 1.0 - omega * omega;
  const double kappa0 = model.within_cov(1, 1);
  const auto& km = model.cov().matrix();
  const auto& chol = model.cov().chol();

  // Coefficients K_{1,l-1} K_{l-1}^{-1} for every within-block position l.
  // All leading principal factors are nested inside the one cached Cholesky.
  std::vector<Eigen::VectorXd> coef(static_cast<std::size_t>(p) + 1);
  std::vector<double> explained(static_cast<std::size_t>(p) + 1, 0.0);  // K_{1,l-1} K_{l-1}^{-1} K_{l-1,1}
  for (int l = 2; l <= p; ++l) {
    const Eigen::VectorXd r = km.col(l - 1).head(l - 1);
    const auto lower = chol.topLeftCorner(l - 1, l - 1).triangularView<Eigen::Lower>();
    const Eigen::VectorXd u = lower.solve(r);
    explained[static_cast<std::size_t>(l)] = u.squaredNorm();
    coef[static_cast<std::size_t>(l)] =
        chol.topLeftCorner(l - 1, l - 1).transpose().triangularView<Eigen::Upper>().solve(u);
  }

  PredictionTrace trace;
  reserve_trace(trace, n);
  const std::vector<double>& y = series.values();
  for (long t = 2; t <= n; ++t) {
    const int l = block_coord(t, p);
    const double q = explained[static_cast<std::size_t>(l)];
    if (t <= p) {
      double y_hat = 0.0;
      for (int j = 0; j < l - 1; ++j) {
        y_hat += coef[static_cast<std::size_t>(l)][j] * y[static_cast<std::size_t>(j)];
      }
      push_step(trace, y_hat, (kappa0 - q) / denom, q / denom);
    } else {
      const std::size_t cur = static_cast<std::size_t>(t - l);      // block start - 1
      const std::size_t prev = cur - static_cast<std::size_t>(p);
      double y_hat = omega * y[static_cast<std::size_t>(t - 1 - p)];
      for (int j = 0; j < l - 1; ++j) {
        y_hat += coef[static_cast<std::size_t>(l)][j] *
                 (y[cur + static_cast<std::size_t>(j)] - omega * y[prev + static_cast<std::size_t>(j)]);
      }
      push_step(trace, y_hat, kappa0 - q, omega * omega * kappa0 / denom + q);
    }
  }
  trace.eipse = eipse_of(series, trace.y_hat);
  return trace;
}

PredictionTrace predict_naive(const BlockSeries& series, const QpgpModel& model) {
  if (!model.standard_init()) throw Error("bad-argument", "prediction requires standard init");
  if (series.period() != model.period()) {
    throw Error("bad-argument", "series and model period differ");
  }
  const long n = series.n();
  if (n < 2) throw Error("bad-argument", "need at least two samples");
  const int p = model.period();
  const double omega = model.omega();
  const double denom = 1.0 - omega * omega;
  const double marginal = model.within_cov(1, 1) / denom;

  std::vector<double> pow_omega(static_cast<std::size_t>(block_index(n, p)));
  pow_omega[0] = 1.0;
  for (std::size_t d = 1; d < pow_omega.size(); ++d) pow_omega[d] = pow_omega[d - 1] * omega;
  const auto cov_entry = [&](long i, long j) {
    const long bi = block_index(i, p);
    const long bj = block_index(j, p);
    const long gap = bi > bj ? bi - bj : bj - bi;
    return pow_omega[static_cast<std::size_t>(gap)] *
           model.within_cov(block_coord(i, p), block_coord(j, p)) / denom;
  };

  const long m = n - 1;
  Eigen::MatrixXd sigma(m, m);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j <= i; ++j) {
      const double v = cov_entry(i + 1, j + 1);
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error("dense-cov-not-pd", "dense covariance is not positive definite");
  }

  // One dense factorization; the leading blocks of L factor every Sigma_{t-1}.
  // v grows by one forward-substitution entry per step, u is a fresh solve.
  PredictionTrace trace;
  reserve_trace(trace, n);
  Eigen::VectorXd v(m);
  Eigen::VectorXd u(m);
  Eigen::VectorXd rhs(m);
  const std::vector<double>& y = series.values();
  for (long t = 2; t <= n; ++t) {
    const long d = t - 1;  // dimension of the conditioning history
    const long idx = d - 1;
    double acc = y[static_cast<std::size_t>(idx)];
    for (long j = 0; j < idx; ++j) acc -= sigma(idx, j) * v[j];
    v[idx] = acc / sigma(idx, idx);

    for (long i = 0; i < d; ++i) rhs[i] = cov_entry(i + 1, t);
    u.head(d) = sigma.topLeftCorner(d, d).triangularView<Eigen::Lower>().solve(rhs.head(d));

    const double y_hat = u.head(d).dot(v.head(d));
    const double pred_var = u.head(d).squaredNorm();
    push_step(trace, y_hat, marginal - pred_var, pred_var);
  }
  trace.eipse = eipse_of(series, trace.y_hat);
  return trace;
}

PredictionTrace predict_plugin(const BlockSeries& series, const FitResult& fit) {
  QpgpModel model(fit.kernel_hat, fit.omega_hat);
  PredictionTrace trace = predict_fast(series, model);
  if (fit.kernel_hat.is_tabulated()) {
    // General-kernel fits discard the initial periodic block from the sum.
    trace.eipse = eipse_of(series, trace.y_hat, static_cast<long>(series.period()) + 1);
  }
  trace.from_converged_fit = fit.converged;
  return trace;
}

}  // namespace qpgp
