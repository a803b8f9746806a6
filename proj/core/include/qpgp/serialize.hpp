#pragma once

#include <string>
#include <vector>

#include "qpgp/bench.hpp"
#include "qpgp/bootstrap.hpp"
#include "qpgp/estimator.hpp"
#include "qpgp/kernel.hpp"
#include "qpgp/model_select.hpp"
#include "qpgp/predictor.hpp"

namespace qpgp {

// Kernel spec JSON: {"form": "mackay"|"matern"|"cosine"|"tabulated", "p": int,
// and per form: theta/sigma2, nu/theta/sigma2, iota/sigma2, values}.
std::string kernel_to_json(const PeriodicKernel& kernel, int indent = -1);
PeriodicKernel kernel_from_json(const std::string& text);

// Fit JSON: {omega_hat, kernel, iters, converged, grad_norm, reduced_nll,
// eipse?}; optional bootstrap and period-selection sections are attached by
// fit_report_json.
std::string fit_to_json(const FitResult& fit, int indent = 2);
FitResult fit_from_json(const std::string& text);
std::string fit_report_json(const FitResult& fit, const BootstrapSummary* bootstrap,
                            const PeriodSelection* selection, int indent = 2);

// Bootstrap JSON: {M, alpha, omega: {se, ci}, kernel: per-parameter or
// per-lag {se, ci}, failures}.
std::string bootstrap_to_json(const BootstrapSummary& summary, int indent = 2);

std::string period_selection_to_json(const PeriodSelection& sel, int indent = 2);
std::string kernel_selection_to_json(const KernelSelection& sel, int indent = 2);
std::string selection_to_csv(const PeriodSelection& sel);
std::string selection_to_csv(const KernelSelection& sel);

// Series CSV: one value per line.
void write_series_csv(const std::string& path, const std::vector<double>& values);

// Trace CSV: t,y,y_hat,var_hat,lo95,hi95 (+ trailing "# eipse,<value>" footer).
void write_trace_csv(const std::string& path, const BlockSeries& series,
                     const PredictionTrace& trace, bool eipse_footer = true);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace qpgp
