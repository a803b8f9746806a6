#include "qpgp/model_select.hpp"

#include <algorithm>
#include <optional>

#include "qpgp/error.hpp"
#include "qpgp/parallel.hpp"
#include "qpgp/predictor.hpp"

namespace qpgp {

namespace detail {

std::vector<int> rank_period_candidates(const std::vector<std::pair<int, double>>& entries) {
  std::vector<int> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = entries[static_cast<std::size_t>(a)];
    const auto& eb = entries[static_cast<std::size_t>(b)];
    if (ea.second != eb.second) return ea.second < eb.second;
    return ea.first < eb.first;  // ties broken by smaller period
  });
  return order;
}

}  // namespace detail

PeriodSelection select_period(const std::vector<double>& values,
                              const std::vector<int>& candidates, const FitConfig& config,
                              int threads) {
  if (candidates.empty()) throw Error("bad-search-spec", "empty period candidate set");
  const long n = static_cast<long>(values.size());
  for (int p : candidates) {
    if (p < 2 || static_cast<long>(p) > n / 3) {
      throw Error("bad-search-spec",
                  "candidate periods must satisfy 2 <= p <= n/3 (k >= 3 blocks)");
    }
  }

  FitConfig general = config;
  general.family.reset();  // period search uses the general kernel

  const int count = static_cast<int>(candidates.size());
  std::vector<std::optional<PeriodCandidate>> slots(static_cast<std::size_t>(count));
  parallel_for(count, threads, [&](int i) {
    const int p = candidates[static_cast<std::size_t>(i)];
    BlockSeries series(values, p);
    FitResult f = fit(series, general);
    slots[static_cast<std::size_t>(i)] =
        PeriodCandidate{p, f.reduced_nll, series.n(), series.complete_blocks(),
                        series.tail_length(), std::move(f)};
  });

  std::vector<std::pair<int, double>> entries;
  entries.reserve(slots.size());
  for (const auto& s : slots) entries.emplace_back(s->p, s->reduced_nll);
  const std::vector<int> order = detail::rank_period_candidates(entries);

  PeriodSelection out;
  out.ranked.reserve(slots.size());
  for (int idx : order) out.ranked.push_back(std::move(*slots[static_cast<std::size_t>(idx)]));
  out.chosen_p = out.ranked.front().p;
  return out;
}

KernelSelection select_kernel(const std::vector<double>& values, int p,
                              const std::vector<std::pair<std::string, KernelChoice>>& families,
                              const FitConfig& config, int threads) {
  if (families.empty()) throw Error("bad-search-spec", "empty kernel family list");
  if (p < 2 || static_cast<long>(p) > static_cast<long>(values.size()) / 2) {
    throw Error("bad-search-spec", "period must satisfy 2 <= p <= n/2");
  }

  const int count = static_cast<int>(families.size());
  std::vector<std::optional<KernelCandidate>> slots(static_cast<std::size_t>(count));
  parallel_for(count, threads, [&](int i) {
    BlockSeries series(values, p);
    FitConfig local = config;
    local.family = families[static_cast<std::size_t>(i)].second;
    FitResult f = fit(series, local);
    const PredictionTrace trace = predict_plugin(series, f);
    slots[static_cast<std::size_t>(i)] = KernelCandidate{
        families[static_cast<std::size_t>(i)].first, local.family, trace.eipse, std::move(f)};
  });

  std::vector<int> order(slots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return slots[static_cast<std::size_t>(a)]->eipse < slots[static_cast<std::size_t>(b)]->eipse;
  });

  KernelSelection out;
  out.ranked.reserve(slots.size());
  for (int idx : order) out.ranked.push_back(std::move(*slots[static_cast<std::size_t>(idx)]));
  out.chosen = out.ranked.front().name;
  return out;
}

std::pair<std::string, KernelChoice> kernel_choice_from_name(const std::string& name, double nu) {
  if (name == "general") return {name, std::nullopt};
  ParametricFamily family;
  if (name == "mackay") {
    family.form = KernelForm::MacKay;
  } else if (name == "matern") {
    family.form = KernelForm::Matern;
    family.nu = nu;
  } else if (name == "cosine") {
    family.form = KernelForm::Cosine;
  } else {
    throw Error("bad-search-spec", "unknown kernel family: " + name);
  }
  return {name, family};
}

}  // namespace qpgp
