#include "qpgp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "qpgp/error.hpp"
#include "qpgp/likelihood.hpp"
#include "qpgp/predictor.hpp"
#include "qpgp/process.hpp"

namespace qpgp {

namespace {

double median_ms(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

double time_ms(const std::function<void()>& op, int reps, int warmups) {
  for (int i = 0; i < warmups; ++i) op();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    op();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return median_ms(samples);
}

void check_close(double a, double b, const char* what) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (!(std::abs(a - b) <= 1e-8 * scale)) {
    std::ostringstream msg;
    msg << what << " disagree: " << a << " vs " << b;
    throw Error("bench-mismatch", msg.str());
  }
}

QpgpModel bench_model(const BenchConfig& config) {
  return {PeriodicKernel::mackay(config.period, config.theta, config.sigma2), config.omega};
}

}  // namespace

std::vector<BenchRow> bench_likelihood(const BenchConfig& config) {
  if (config.sizes.empty()) throw Error("bad-search-spec", "no sizes given");
  const QpgpModel model = bench_model(config);
  std::vector<BenchRow> rows;
  for (long n : config.sizes) {
    if (n < config.period || n % config.period != 0) {
      throw Error("bad-search-spec", "sizes must be positive multiples of p");
    }
    const BlockSeries series =
        generate(model, static_cast<int>(n / config.period), config.seed ^ static_cast<std::uint64_t>(n));

    BenchRow row;
    row.n = n;
    row.naive_value = nll_naive(series, model).value;
    row.structured_value = nll_block(series, model).value;
    check_close(row.naive_value, row.structured_value, "likelihood values");

    row.naive_ms = time_ms([&] { nll_naive(series, model); }, config.reps, config.warmups);
    row.structured_ms = time_ms([&] { nll_block(series, model); }, config.reps, config.warmups);
    row.speedup = row.naive_ms / row.structured_ms;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchRow> bench_prediction(const BenchConfig& config) {
  if (config.sizes.empty()) throw Error("bad-search-spec", "no sizes given");
  const QpgpModel model = bench_model(config);
  std::vector<BenchRow> rows;
  for (long n : config.sizes) {
    if (n < config.period || n % config.period != 0) {
      throw Error("bad-search-spec", "sizes must be positive multiples of p");
    }
    const BlockSeries series =
        generate(model, static_cast<int>(n / config.period), config.seed ^ static_cast<std::uint64_t>(n));

    const PredictionTrace naive = predict_naive(series, model);
    const PredictionTrace fast = predict_fast(series, model);
    for (std::size_t i = 0; i < fast.y_hat.size(); ++i) {
      check_close(naive.y_hat[i], fast.y_hat[i], "predictions");
      check_close(naive.var_hat[i], fast.var_hat[i], "prediction variances");
    }

    BenchRow row;
    row.n = n;
    row.naive_value = naive.eipse;
    row.structured_value = fast.eipse;
    check_close(row.naive_value, row.structured_value, "IPSE values");

    row.naive_ms = time_ms([&] { predict_naive(series, model); }, config.reps, config.warmups);
    row.structured_ms = time_ms([&] { predict_fast(series, model); }, config.reps, config.warmups);
    row.speedup = row.naive_ms / row.structured_ms;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows, const std::string& value_label) {
  std::ostringstream out;
  out << "       n    naive ms  structured ms    speedup    " << value_label << "\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%8ld  %10.3g  %13.3g  %9.3g  %12.6g\n", r.n, r.naive_ms,
                  r.structured_ms, r.speedup, r.structured_value);
    out << line;
  }
  return out.str();
}

}  // namespace qpgp
