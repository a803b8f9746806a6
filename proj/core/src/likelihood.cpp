#include "qpgp/likelihood.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "qpgp/error.hpp"

namespace qpgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void require_standard_complete(const BlockSeries& series, const QpgpModel& model,
                               const char* partial_code) {
  if (!model.standard_init()) {
    throw Error("bad-argument", "likelihood requires a standard-init model");
  }
  if (series.period() != model.period()) {
    throw Error("bad-argument", "series and model period differ");
  }
  if (series.tail_length() != 0) {
    throw Error(partial_code, "defined for complete blocks only (n = k p)");
  }
}

}  // namespace

LikelihoodValue nll_naive(const BlockSeries& series, const QpgpModel& model) {
  require_standard_complete(series, model, "partial-block-unsupported-naive");
  const long n = series.n();
  const int p = model.period();
  const double omega = model.omega();
  const double denom = 1.0 - omega * omega;

  std::vector<double> pow_omega(static_cast<std::size_t>(series.complete_blocks()));
  pow_omega[0] = 1.0;
  for (std::size_t d = 1; d < pow_omega.size(); ++d) pow_omega[d] = pow_omega[d - 1] * omega;

  Eigen::MatrixXd sigma(n, n);
  for (long i = 1; i <= n; ++i) {
    const int li = block_coord(i, p);
    const long bi = block_index(i, p);
    for (long j = 1; j <= i; ++j) {
      const long gap = bi - block_index(j, p);
      const double v =
          pow_omega[static_cast<std::size_t>(gap)] * model.within_cov(li, block_coord(j, p)) / denom;
      sigma(i - 1, j - 1) = v;
      sigma(j - 1, i - 1) = v;
    }
  }

  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sigma);  // factors in place
  if (llt.info() != Eigen::Success) {
    throw Error("dense-cov-not-pd", "dense covariance is not positive definite");
  }
  const auto lower = sigma.triangularView<Eigen::Lower>();
  double logdet = 0.0;
  for (long i = 0; i < n; ++i) logdet += std::log(sigma(i, i));

  Eigen::VectorXd z =
      lower.solve(Eigen::Map<const Eigen::VectorXd>(series.values().data(), n));
  LikelihoodValue out;
  out.value = logdet + 0.5 * z.squaredNorm() + 0.5 * static_cast<double>(n) * kLog2Pi;
  return out;
}

LikelihoodValue nll_block(const BlockSeries& series, const QpgpModel& model) {
  require_standard_complete(series, model, "partial-block-unsupported-block");
  LikelihoodValue out;
  out.value = nll_block_at(series, model.omega(), model.cov());
  return out;
}

double nll_block_at(const BlockSeries& series, double omega, const BlockCov& cov) {
  const int k = series.complete_blocks();
  const int p = series.period();
  // One triangular solve against all blocks; residual quadratic forms are
  // column norms of differences.
  Eigen::MatrixXd w = cov.half_solve_cols(series.block_matrix());
  double quad_sum = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    quad_sum += (w.col(i + 1) - omega * w.col(i)).squaredNorm();
  }
  const double marginal = 0.5 * (cov.logdet() - p * std::log(1.0 - omega * omega)) +
                          0.5 * (1.0 - omega * omega) * w.col(0).squaredNorm();
  return 0.5 * (k - 1) * cov.logdet() + 0.5 * quad_sum + marginal +
         0.5 * static_cast<double>(series.n()) * kLog2Pi;
}

LikelihoodValue nll_reduced(const BlockSeries& series, double omega, const BlockCov& cov,
                            bool with_gradients) {
  const int k = series.complete_blocks();
  const int l = series.tail_length();
  const int p = series.period();
  if (cov.dim() != p) throw Error("bad-argument", "covariance dimension differs from period");
  if (k < 2) throw Error("insufficient-blocks", "reduced likelihood needs k >= 2");

  Eigen::MatrixXd w = cov.half_solve_cols(series.block_matrix());
  double quad_sum = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    quad_sum += (w.col(i + 1) - omega * w.col(i)).squaredNorm();
  }

  LikelihoodValue out;
  out.value = cov.logdet() + quad_sum / (k - 1);

  Eigen::VectorXd tail_resid;
  if (l >= 1) {
    tail_resid = series.block_head(k + 1, l) - omega * series.block_head(k, l);
    out.value += (cov.leading_logdet(l) + cov.leading_quad(l, tail_resid)) / (k - 1);
  }

  if (!with_gradients) return out;

  // True derivatives of the scalar objective (checked against finite
  // differences); the update equations below are their stationary points.
  double cross = 0.0, self = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    cross += w.col(i).dot(w.col(i + 1));
    self += w.col(i).squaredNorm();
  }
  double grad_omega = 2.0 * (omega * self - cross) / (k - 1);

  Eigen::MatrixXd residuals(p, k - 1);
  for (int i = 0; i + 1 < k; ++i) {
    residuals.col(i) = series.block(i + 2) - omega * series.block(i + 1);
  }
  const Eigen::MatrixXd s = residuals * residuals.transpose() / (k - 1);
  const Eigen::MatrixXd inv = cov.inverse();
  Eigen::MatrixXd grad_cov = inv - inv * s * inv;

  if (l >= 1) {
    const Eigen::MatrixXd cov_l = cov.matrix().topLeftCorner(l, l);
    const Eigen::MatrixXd inv_l = cov_l.llt().solve(Eigen::MatrixXd::Identity(l, l));
    const Eigen::VectorXd prev = series.block_head(k, l);
    grad_omega += 2.0 *
                  (omega * prev.dot(inv_l * prev) -
                   prev.dot(inv_l * Eigen::VectorXd(series.block_head(k + 1, l)))) /
                  (k - 1);
    const Eigen::VectorXd u = inv_l * tail_resid;
    grad_cov.topLeftCorner(l, l) += (inv_l - u * u.transpose()) / (k - 1);
  }

  out.grad_omega = grad_omega;
  out.grad_cov = std::move(grad_cov);
  return out;
}

}  // namespace qpgp
