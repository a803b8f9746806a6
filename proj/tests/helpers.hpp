#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qpgp/error.hpp"
#include "qpgp/kernel.hpp"
#include "qpgp/process.hpp"

namespace qpgp::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Runs f and returns the qpgp::Error code it throws, or "" if it does not.
template <class F>
std::string error_code_of(F&& f) {
  try {
    f();
  } catch (const qpgp::Error& e) {
    return e.code();
  } catch (...) {
    return "<non-qpgp-error>";
  }
  return "";
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Valid tabulated kernel built from non-negative weights at the 2p-1
/// circulant frequencies, so its circulant spectrum is non-negative by
/// construction.
inline PeriodicKernel random_psd_tabulated(int p, std::mt19937_64& rng) {
  const int m = 2 * p - 1;
  std::vector<double> w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (auto& v : w) {
    v = std::abs(std::normal_distribution<double>(0.0, 1.0)(rng)) + 0.05;
    total += v;
  }
  const double scale = uniform(rng, 0.5, 2.0);
  std::vector<double> kappa(static_cast<std::size_t>(p));
  for (int t = 0; t < p; ++t) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      s += w[static_cast<std::size_t>(j)] *
           std::cos(2.0 * std::numbers::pi * t * j / m);
    }
    kappa[static_cast<std::size_t>(t)] = scale * s / total;
  }
  return PeriodicKernel::tabulated(p, std::move(kappa));
}

/// Random kernel from any of the four families.
inline PeriodicKernel random_kernel(int p, std::mt19937_64& rng, int family = -1) {
  if (family < 0) family = uniform_int(rng, 0, 3);
  switch (family % 4) {
    case 0:
      return PeriodicKernel::mackay(p, uniform(rng, 0.3, 2.5), uniform(rng, 0.5, 2.0));
    case 1: {
      const double nus[] = {0.5, 1.5, 2.5};
      return PeriodicKernel::matern(p, nus[uniform_int(rng, 0, 2)], uniform(rng, 0.3, 2.5),
                                    uniform(rng, 0.5, 2.0));
    }
    case 2:
      return PeriodicKernel::cosine(p, uniform_int(rng, 1, std::max(1, p / 2)),
                                    uniform(rng, 0.5, 2.0));
    default:
      return random_psd_tabulated(p, rng);
  }
}

/// Independent high-resolution reimplementation of the spectral projection:
/// complex-exponential transforms on a dense trapezoid grid, same pass budget
/// and residual lift as the implementation.
inline std::vector<double> spectral_project_oracle(int p, std::vector<double> kappa,
                                                   int points = 100001,
                                                   int max_passes = 3000) {
  using cd = std::complex<double>;
  const double pi = std::numbers::pi;
  const double h = 2.0 * pi / (points - 1);
  // e^{i t lambda_j} tables, built once from complex exponentials
  std::vector<std::vector<cd>> expi(static_cast<std::size_t>(p),
                                    std::vector<cd>(static_cast<std::size_t>(points)));
  for (int j = 0; j < points; ++j) {
    const double lambda = -pi + h * j;
    for (int t = 0; t < p; ++t) {
      expi[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] =
          std::exp(cd(0.0, t * lambda));
    }
  }

  std::vector<double> f(static_cast<std::size_t>(points));
  double scale = 1e-300;
  for (int pass = 0; pass <= max_passes; ++pass) {
    scale = 1e-300;
    for (double v : kappa) scale = std::max(scale, std::abs(v));
    double min_f = 0.0;
    for (int j = 0; j < points; ++j) {
      cd acc(kappa[0], 0.0);
      for (int t = 1; t < p; ++t) {
        const cd e = expi[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
        acc += kappa[static_cast<std::size_t>(t)] * (e + std::conj(e));
      }
      f[static_cast<std::size_t>(j)] = acc.real() / (2.0 * pi);
      min_f = std::min(min_f, f[static_cast<std::size_t>(j)]);
    }
    if (min_f >= -1e-10 * scale || pass == max_passes) break;
    for (auto& v : f) v = std::max(v, 0.0);
    for (int t = 0; t < p; ++t) {
      cd acc(0.0, 0.0);
      for (int j = 0; j < points; ++j) {
        const double w = (j == 0 || j == points - 1) ? 0.5 : 1.0;
        acc += w * f[static_cast<std::size_t>(j)] *
               expi[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      }
      kappa[static_cast<std::size_t>(t)] = (acc * h).real();
    }
  }

  // continuous minimum: refine every bracketed grid local minimum
  const auto f_at = [&](double lambda) {
    cd acc(kappa[0], 0.0);
    for (int t = 1; t < p; ++t) {
      acc += kappa[static_cast<std::size_t>(t)] * 2.0 * std::cos(t * lambda);
    }
    return acc.real() / (2.0 * pi);
  };
  double true_min = f[0];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int j = 0; j < points; ++j) {
    true_min = std::min(true_min, f[static_cast<std::size_t>(j)]);
    const int prev = j == 0 ? points - 2 : j - 1;
    const int next = j == points - 1 ? 1 : j + 1;
    if (f[static_cast<std::size_t>(j)] > f[static_cast<std::size_t>(prev)] ||
        f[static_cast<std::size_t>(j)] > f[static_cast<std::size_t>(next)]) {
      continue;
    }
    double a = -pi + h * (j - 1), b = -pi + h * (j + 1);
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f_at(x1), f2 = f_at(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = f_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = f_at(x2);
      }
    }
    true_min = std::min({true_min, f1, f2});
  }
  if (true_min < -1e-11 * scale) {
    kappa[0] += 2.0 * pi * (-true_min) * (1.0 + 1e-6) + 1e-13 * scale;
  }
  return kappa;
}

inline std::vector<double> tabulated_values(const PeriodicKernel& k) {
  std::vector<double> v(static_cast<std::size_t>(k.period()));
  for (int t = 0; t < k.period(); ++t) v[static_cast<std::size_t>(t)] = k.evaluate(t);
  return v;
}

}  // namespace qpgp::test
