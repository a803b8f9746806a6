#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpgp/kernel.hpp"

namespace qpgp {

struct BenchConfig {
  std::vector<long> sizes;  // sample counts n
  int period = 10;
  double omega = 0.5;
  double theta = 1.0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;
  int reps = 7;
  int warmups = 2;
};

struct BenchRow {
  long n = 0;
  double naive_ms = 0.0;       // median over reps
  double structured_ms = 0.0;  // median over reps
  double speedup = 0.0;
  double naive_value = 0.0;      // likelihood value or IPSE
  double structured_value = 0.0;
};

/// Times the dense-covariance likelihood against the blockwise one on
/// identical generated data. Values must agree to 1e-8 relative before any
/// timing is reported; disagreement raises Error("bench-mismatch").
std::vector<BenchRow> bench_likelihood(const BenchConfig& config);

/// Times the dense one-step predictor against the blockwise one; traces must
/// agree pointwise (values and variances) to 1e-8 before timing.
std::vector<BenchRow> bench_prediction(const BenchConfig& config);

std::string bench_table(const std::vector<BenchRow>& rows, const std::string& value_label);

}  // namespace qpgp
