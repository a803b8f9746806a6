#include "qpgp/block_cov.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "qpgp/error.hpp"

namespace qpgp {

namespace {

bool try_llt(const Eigen::MatrixXd& a, Eigen::MatrixXd& lower, double& logdet,
             double& pivot_ratio) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  double ld = 0.0;
  double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double d = lower(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    ld += std::log(d);
    pmin = std::min(pmin, d);
    pmax = std::max(pmax, d);
  }
  logdet = 2.0 * ld;
  pivot_ratio = pmin / pmax;
  return true;
}

// Squared pivot ratio below this marks the factor as too ill-conditioned for
// the structured and dense likelihood routes to agree to 1e-8; escalation
// continues, falling back to the best successful factor at the ladder end.
constexpr double kPivotRatio2Floor = 1e-7;

}  // namespace

BlockCov::BlockCov(const PeriodicKernel& kernel) {
  const int p = kernel.period();
  mat_.resize(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel.evaluate(i - j);
      mat_(i, j) = v;
      mat_(j, i) = v;
    }
  }
  factorize();
}

BlockCov::BlockCov(Eigen::MatrixXd symmetric) : mat_(std::move(symmetric)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 1) {
    throw Error("bad-kernel-spec", "covariance matrix must be square");
  }
  factorize();
}

void BlockCov::factorize() {
  const int p = dim();
  const double base = mat_.trace() / p;
  if (!(base > 0.0) || !std::isfinite(base)) {
    throw Error("kernel-not-positive-definite", "non-positive trace");
  }

  const Eigen::MatrixXd raw = mat_;
  Eigen::MatrixXd lower;
  double logdet = 0.0, ratio = 0.0;
  bool have_fallback = false;

  const auto accept = [&](double ridge) {
    if (ridge > 0.0) mat_ = raw + ridge * Eigen::MatrixXd::Identity(p, p);
    chol_ = std::move(lower);
    logdet_ = logdet;
    jitter_ = ridge;
  };

  double fallback_ridge = 0.0;
  Eigen::MatrixXd fallback_lower;
  double fallback_logdet = 0.0;

  for (double eps = 0.0; eps <= 1e-6 * 1.5; eps = (eps == 0.0 ? 1e-10 : eps * 10.0)) {
    const double ridge = eps * base;
    const Eigen::MatrixXd candidate =
        eps == 0.0 ? raw : Eigen::MatrixXd(raw + ridge * Eigen::MatrixXd::Identity(p, p));
    if (try_llt(candidate, lower, logdet, ratio)) {
      if (ratio * ratio >= kPivotRatio2Floor) {
        accept(ridge);
        return;
      }
      have_fallback = true;
      fallback_ridge = ridge;
      fallback_lower = std::move(lower);
      fallback_logdet = logdet;
    }
  }
  if (have_fallback) {
    lower = std::move(fallback_lower);
    logdet = fallback_logdet;
    accept(fallback_ridge);
    return;
  }
  throw Error("kernel-not-positive-definite",
              "Cholesky failed even after maximum jitter of 1e-6 * trace/p");
}

Eigen::VectorXd BlockCov::half_solve(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return chol_.triangularView<Eigen::Lower>().solve(x);
}

Eigen::MatrixXd BlockCov::half_solve_cols(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  return chol_.triangularView<Eigen::Lower>().solve(x);
}

double BlockCov::quad(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return half_solve(x).squaredNorm();
}

double BlockCov::bilinear(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y) const {
  return half_solve(x).dot(half_solve(y));
}

Eigen::MatrixXd BlockCov::solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  Eigen::MatrixXd z = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Eigen::MatrixXd BlockCov::inverse() const {
  return solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

double BlockCov::leading_logdet(int m) const {
  double ld = 0.0;
  for (int i = 0; i < m; ++i) ld += std::log(chol_(i, i));
  return 2.0 * ld;
}

double BlockCov::leading_quad(int m, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return chol_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(x).squaredNorm();
}

double BlockCov::leading_bilinear(int m, const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const auto l = chol_.topLeftCorner(m, m).triangularView<Eigen::Lower>();
  return l.solve(x).dot(l.solve(y));
}

}  // namespace qpgp
