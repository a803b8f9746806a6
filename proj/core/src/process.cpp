#include "qpgp/process.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qpgp/error.hpp"

namespace qpgp {

BlockSeries::BlockSeries(std::vector<double> values, int period)
    : values_(std::move(values)), period_(period) {
  if (period_ < 1) throw Error("bad-argument", "period must be positive");
  if (values_.empty()) throw Error("empty-series", "series has no values");
  k_ = static_cast<int>(n() / period_);
  l_ = static_cast<int>(n() % period_);
}

Eigen::Map<const Eigen::VectorXd> BlockSeries::block(int i) const {
  return {values_.data() + static_cast<std::size_t>(i - 1) * period_,
          static_cast<Eigen::Index>(period_)};
}

Eigen::Map<const Eigen::VectorXd> BlockSeries::block_head(int i, int len) const {
  return {values_.data() + static_cast<std::size_t>(i - 1) * period_,
          static_cast<Eigen::Index>(len)};
}

Eigen::Map<const Eigen::MatrixXd> BlockSeries::block_matrix() const {
  return {values_.data(), static_cast<Eigen::Index>(period_), static_cast<Eigen::Index>(k_)};
}

BlockSeries BlockSeries::complete_part() const {
  std::vector<double> v(values_.begin(),
                        values_.begin() + static_cast<std::ptrdiff_t>(k_) * period_);
  return BlockSeries(std::move(v), period_);
}

namespace {

double validate_omega(double omega) {
  if (!std::isfinite(omega) || std::abs(omega) >= 1.0) {
    throw Error("omega-out-of-range", "|omega| must be < 1");
  }
  return std::clamp(omega, -kOmegaMax, kOmegaMax);
}

}  // namespace

QpgpModel::QpgpModel(PeriodicKernel kernel, double omega)
    : kernel_(std::move(kernel)), omega_(validate_omega(omega)), cov_(kernel_) {
  standard_init_cov_ = cov_.matrix() / (1.0 - omega_ * omega_);
}

QpgpModel::QpgpModel(PeriodicKernel kernel, double omega, CustomInit init)
    : kernel_(std::move(kernel)), omega_(validate_omega(omega)), cov_(kernel_) {
  if (init.covariance.rows() != period() || init.covariance.cols() != period()) {
    throw Error("bad-argument", "init covariance must be p x p");
  }
  init_cov_.emplace(std::move(init.covariance));
}

const Eigen::MatrixXd& QpgpModel::init_covariance() const {
  return init_cov_ ? init_cov_->matrix() : standard_init_cov_;
}

BlockSeries generate(const QpgpModel& model, int n_blocks, std::uint64_t seed) {
  if (n_blocks < 1) throw Error("bad-argument", "n_blocks must be >= 1");
  const int p = model.period();
  const double omega = model.omega();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd g(p);
  const auto draw = [&](const Eigen::MatrixXd& lower) {
    for (int i = 0; i < p; ++i) g[i] = gauss(rng);
    return Eigen::VectorXd(lower.triangularView<Eigen::Lower>() * g);
  };

  std::vector<double> out(static_cast<std::size_t>(n_blocks) * p);
  Eigen::VectorXd y;
  if (model.standard_init()) {
    y = draw(model.cov().chol()) / std::sqrt(1.0 - omega * omega);
  } else {
    y = draw(BlockCov(model.init_covariance()).chol());
  }
  Eigen::Map<Eigen::VectorXd>(out.data(), p) = y;
  for (int i = 1; i < n_blocks; ++i) {
    y = omega * y + draw(model.cov().chol());
    Eigen::Map<Eigen::VectorXd>(out.data() + static_cast<std::size_t>(i) * p, p) = y;
  }
  return BlockSeries(std::move(out), p);
}

double cov_oracle(const QpgpModel& model, long t, long s) {
  if (t < 1 || s < 1) throw Error("bad-argument", "indices are 1-based");
  if (s > t) std::swap(t, s);
  const int p = model.period();
  const double omega = model.omega();
  const int lt = block_coord(t, p);
  const int ls = block_coord(s, p);
  const long gap = block_index(t, p) - block_index(s, p);
  const double between = std::pow(omega, static_cast<double>(gap));
  const double kappa = model.within_cov(lt, ls);

  if (model.standard_init()) {
    return between * kappa / (1.0 - omega * omega);
  }
  const double w2i = std::pow(omega, 2.0 * static_cast<double>(blocks_before(s, p)));
  const double init_term = model.init_covariance()(lt - 1, ls - 1);
  return between * (kappa * (1.0 - w2i) / (1.0 - omega * omega) + w2i * init_term);
}

}  // namespace qpgp
