#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "qpgp/block_cov.hpp"
#include "qpgp/kernel.hpp"

namespace qpgp {

/// Largest admissible |omega|; keeps the standard initial covariance
/// K / (1 - omega^2) finite.
inline constexpr double kOmegaMax = 1.0 - 1e-6;

/// Observed series partitioned into k complete period-p blocks plus an
/// optional partial tail of length l, 0 <= l < p. Blocks are 1-based.
class BlockSeries {
 public:
  BlockSeries(std::vector<double> values, int period);

  long n() const { return static_cast<long>(values_.size()); }
  int period() const { return period_; }
  int complete_blocks() const { return k_; }  // k
  int tail_length() const { return l_; }      // l

  const std::vector<double>& values() const { return values_; }
  double value(long t) const { return values_[static_cast<std::size_t>(t - 1)]; }  // 1-based

  /// Block i = values[(i-1)p+1 .. ip], i in 1..k.
  Eigen::Map<const Eigen::VectorXd> block(int i) const;
  /// Leading len entries of block i; i = k+1 addresses the partial tail.
  Eigen::Map<const Eigen::VectorXd> block_head(int i, int len) const;
  /// p x k matrix whose columns are the complete blocks.
  Eigen::Map<const Eigen::MatrixXd> block_matrix() const;

  /// Series truncated to complete blocks only.
  BlockSeries complete_part() const;

 private:
  std::vector<double> values_;
  int period_;
  int k_;
  int l_;
};

struct CustomInit {
  Eigen::MatrixXd covariance;  // of the zero-mean initial block
};

/// Quasi-periodic Gaussian process: blocks follow Y_{i+1} = omega Y_i + Z_{i+1}
/// with i.i.d. Z ~ N(0, K). Standard init draws Y_1 from N(0, K/(1-omega^2)).
/// Immutable; safe for concurrent reads.
class QpgpModel {
 public:
  QpgpModel(PeriodicKernel kernel, double omega);
  QpgpModel(PeriodicKernel kernel, double omega, CustomInit init);

  int period() const { return kernel_.period(); }
  double omega() const { return omega_; }
  const PeriodicKernel& kernel() const { return kernel_; }
  const BlockCov& cov() const { return cov_; }
  bool standard_init() const { return !init_cov_.has_value(); }
  /// Covariance of the initial block (standard: K/(1-omega^2)).
  const Eigen::MatrixXd& init_covariance() const;

  /// Within-period covariance between coordinates u, v in 1..p, including any
  /// jitter applied to K. All dense covariance construction goes through this
  /// so the naive and structured paths describe the same process.
  double within_cov(int u, int v) const { return cov_.matrix()(u - 1, v - 1); }

 private:
  PeriodicKernel kernel_;
  double omega_;
  BlockCov cov_;
  std::optional<BlockCov> init_cov_;
  Eigen::MatrixXd standard_init_cov_;
};

/// Coordinate of t within its block, in 1..p.
inline int block_coord(long t, int p) { return static_cast<int>((t - 1) % p) + 1; }
/// Number of complete blocks before the block containing t.
inline long blocks_before(long t, int p) { return (t - block_coord(t, p)) / p; }
/// 1-based index of the block containing t (equals ceil(t/p)).
inline long block_index(long t, int p) { return blocks_before(t, p) + 1; }

/// Draws a sample path of n_blocks complete blocks. Deterministic given seed;
/// parallel replicates should derive disjoint streams as seed ^ replicate.
BlockSeries generate(const QpgpModel& model, int n_blocks, std::uint64_t seed);

/// Exact covariance Cov(Y_t, Y_s) for 1-based sample indices.
double cov_oracle(const QpgpModel& model, long t, long s);

}  // namespace qpgp
