#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qpgp {

struct PreprocessSpec {
  enum class Detrend { None, Mean, Quadratic };
  enum class Impute { None, Linear };
  Detrend detrend = Detrend::None;
  Impute impute = Impute::None;
  std::string column;  // name or 0-based index of the value column; empty = default
};

struct LoadReport {
  long rows = 0;
  long missing = 0;
  long boundary_filled = 0;  // leading/trailing missing extended with nearest value
  std::string column_used;
  bool had_header = false;
};

/// Reads a one- or two-column CSV (comma separated, optional header detected
/// by a non-numeric first row). For two columns the first is time, checked
/// for strict monotonicity and then ignored. Empty cells, "NaN" and "NA"
/// (case-insensitive) mark missing values; with Impute::Linear they are
/// filled by linear interpolation, boundary gaps by the nearest observation.
std::pair<std::vector<double>, LoadReport> load_csv(const std::string& path,
                                                    const PreprocessSpec& spec);

struct QuadTrend {
  double a = 0.0;  // intercept
  double b = 0.0;  // linear coefficient
  double c = 0.0;  // quadratic coefficient
};

/// Least-squares fit of a + b t + c t^2 over t = 1..n; returns residuals and
/// coefficients. Needs n >= 3.
std::pair<std::vector<double>, QuadTrend> detrend_quadratic(const std::vector<double>& values);

/// Subtracts the sample mean; returns residuals and the removed mean.
std::pair<std::vector<double>, double> detrend_mean(const std::vector<double>& values);

struct PreprocessResult {
  std::vector<double> values;
  LoadReport load;
  std::optional<QuadTrend> trend;
  std::optional<double> mean_removed;
};

/// load_csv followed by the detrend step named in the spec.
PreprocessResult load_and_preprocess(const std::string& path, const PreprocessSpec& spec);

}  // namespace qpgp
