#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpgp/estimator.hpp"

namespace qpgp {

struct PeriodCandidate {
  int p = 0;
  double reduced_nll = 0.0;
  long n = 0;
  int k = 0;
  int l = 0;
  FitResult fit;
};

struct PeriodSelection {
  std::vector<PeriodCandidate> ranked;  // ascending by reduced_nll, ties to smaller p
  int chosen_p = 0;
};

/// Kernel family candidate: nullopt denotes the general (tabulated) path.
using KernelChoice = std::optional<ParametricFamily>;

struct KernelCandidate {
  std::string name;
  KernelChoice choice;
  double eipse = 0.0;
  FitResult fit;
};

struct KernelSelection {
  std::vector<KernelCandidate> ranked;  // ascending by EIPSE, ties keep listing order
  std::string chosen;
};

/// Fits the general kernel for each candidate period (partial tails included
/// through the partial-block path) and picks the smallest reduced negative
/// log-likelihood. Candidates must satisfy 2 <= p <= n/3.
PeriodSelection select_period(const std::vector<double>& values,
                              const std::vector<int>& candidates, const FitConfig& config,
                              int threads = 1);

/// Fits each kernel family at fixed p, scores by plug-in EIPSE, ranks.
KernelSelection select_kernel(const std::vector<double>& values, int p,
                              const std::vector<std::pair<std::string, KernelChoice>>& families,
                              const FitConfig& config, int threads = 1);

/// Parses a family name ("general", "mackay", "matern", "cosine") into a
/// candidate spec; Matern uses the given nu.
std::pair<std::string, KernelChoice> kernel_choice_from_name(const std::string& name,
                                                             double nu = 1.5);

namespace detail {
// Stable ranking used by select_period: ascending criterion, ties to the
// smaller period.
std::vector<int> rank_period_candidates(const std::vector<std::pair<int, double>>& entries);
}  // namespace detail

}  // namespace qpgp
