#include "qpgp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "qpgp/error.hpp"

namespace qpgp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_period(int period) {
  if (period < 1) throw Error("bad-kernel-spec", "period must be a positive integer");
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error("bad-kernel-spec", std::string(name) + " must be positive and finite");
  }
}

// Reduces an arbitrary integer lag by evenness first, then period.
inline long reduce_lag(long t, int p) {
  long a = t < 0 ? -t : t;
  return a % p;
}

// Canonical representative in [0, p/2] for parametric forms, so that all
// aliases of a lag evaluate bit-identically.
inline long fold_lag(long t, int p) {
  const long r = reduce_lag(t, p);
  return std::min(r, p - r);
}

// Half-integer Matern profile in phi = (2/theta) sqrt(2 nu) |sin(pi t / p)|.
double matern_profile(double nu, double phi) {
  const double e = std::exp(-phi);
  if (nu == 0.5) return e;
  if (nu == 1.5) return (1.0 + phi) * e;
  if (nu == 2.5) return (1.0 + phi + phi * phi / 3.0) * e;
  throw Error("matern-nu-unsupported", "nu must be one of 0.5, 1.5, 2.5");
}

struct Evaluator {
  int p;
  long r;       // reduced lag in [0, p), used by tabulated kernels
  long folded;  // canonical representative in [0, p/2], parametric forms

  double operator()(const MacKayForm& f) const {
    const double s = std::sin(kPi * static_cast<double>(folded) / p);
    return f.sigma2 * std::exp(-f.theta * f.theta * s * s);
  }
  double operator()(const MaternForm& f) const {
    const double s = std::sin(kPi * static_cast<double>(folded) / p);
    const double phi = 2.0 / f.theta * std::sqrt(2.0 * f.nu * s * s);
    if (phi == 0.0) return f.sigma2;
    return f.sigma2 * matern_profile(f.nu, phi);
  }
  double operator()(const CosineForm& f) const {
    return f.sigma2 * std::cos(2.0 * kPi * f.iota * static_cast<double>(folded) / p);
  }
  double operator()(const TabulatedForm& f) const {
    return f.values[static_cast<std::size_t>(r)];
  }
};

}  // namespace

PeriodicKernel PeriodicKernel::mackay(int period, double theta, double sigma2) {
  check_period(period);
  check_positive(theta, "theta");
  check_positive(sigma2, "sigma2");
  return PeriodicKernel(period, MacKayForm{theta, sigma2});
}

PeriodicKernel PeriodicKernel::matern(int period, double nu, double theta, double sigma2) {
  check_period(period);
  if (nu != 0.5 && nu != 1.5 && nu != 2.5) {
    throw Error("matern-nu-unsupported", "nu must be one of 0.5, 1.5, 2.5");
  }
  check_positive(theta, "theta");
  check_positive(sigma2, "sigma2");
  return PeriodicKernel(period, MaternForm{nu, theta, sigma2});
}

PeriodicKernel PeriodicKernel::cosine(int period, int iota, double sigma2) {
  check_period(period);
  if (iota < 1) throw Error("bad-kernel-spec", "iota must be a positive integer");
  check_positive(sigma2, "sigma2");
  return PeriodicKernel(period, CosineForm{iota, sigma2});
}

PeriodicKernel PeriodicKernel::tabulated(int period, std::vector<double> values) {
  check_period(period);
  if (static_cast<int>(values.size()) != period) {
    throw Error("bad-kernel-spec", "tabulated kernel needs exactly p values (lags 0..p-1)");
  }
  double scale = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("bad-kernel-spec", "tabulated value not finite");
    scale = std::max(scale, std::abs(v));
  }
  const Eigen::VectorXd spec = circulant_spectrum(values);
  if (spec.minCoeff() < -1e-10 * std::max(scale, 1e-300)) {
    throw Error("kernel-not-positive-definite",
                "tabulated kernel has negative spectrum at the 2p-1 circulant frequencies");
  }
  return PeriodicKernel(period, TabulatedForm{std::move(values)});
}

std::string PeriodicKernel::form_name() const {
  struct Namer {
    std::string operator()(const MacKayForm&) const { return "mackay"; }
    std::string operator()(const MaternForm&) const { return "matern"; }
    std::string operator()(const CosineForm&) const { return "cosine"; }
    std::string operator()(const TabulatedForm&) const { return "tabulated"; }
  };
  return std::visit(Namer{}, form_);
}

double PeriodicKernel::evaluate(long t) const {
  return std::visit(Evaluator{period_, reduce_lag(t, period_), fold_lag(t, period_)}, form_);
}

Eigen::VectorXd circulant_spectrum(const std::vector<double>& values) {
  const int p = static_cast<int>(values.size());
  const int m = 2 * p - 1;
  Eigen::VectorXd spec(m);
  for (int j = 0; j < m; ++j) {
    double s = values[0];
    for (int t = 1; t < p; ++t) {
      s += 2.0 * values[static_cast<std::size_t>(t)] * std::cos(2.0 * kPi * t * j / m);
    }
    spec[j] = s;
  }
  return spec;
}

namespace {

// Value of the truncated spectrum at a single frequency.
double spectrum_at(const Eigen::VectorXd& v, double lambda) {
  double f = v[0];
  for (int t = 1; t < v.size(); ++t) f += 2.0 * v[t] * std::cos(t * lambda);
  return f / (2.0 * kPi);
}

// Continuous minimum of the truncated spectrum: every bracketed grid local
// minimum is refined by golden section, so between-grid dips are caught.
double refined_spectrum_min(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda,
                            const Eigen::VectorXd& f_grid) {
  const int points = static_cast<int>(lambda.size());
  double best = f_grid.minCoeff();
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int j = 0; j < points; ++j) {
    const int prev = j == 0 ? points - 2 : j - 1;  // endpoints coincide (+-pi)
    const int next = j == points - 1 ? 1 : j + 1;
    if (f_grid[j] > f_grid[prev] || f_grid[j] > f_grid[next]) continue;
    double a = lambda[j] - (lambda[1] - lambda[0]);
    double b = lambda[j] + (lambda[1] - lambda[0]);
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = spectrum_at(v, x1), f2 = spectrum_at(v, x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = spectrum_at(v, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = spectrum_at(v, x2);
      }
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

}  // namespace

PeriodicKernel spectral_project(int period, const std::vector<double>& kappa) {
  check_period(period);
  const int p = period;
  if (static_cast<int>(kappa.size()) != p) {
    throw Error("bad-kernel-spec", "spectral_project needs lags 0..p-1");
  }

  const int grid = std::max(4096, 8 * p);  // intervals; grid is even
  const double h = 2.0 * kPi / grid;
  const int points = grid + 1;  // both endpoints, trapezoid weights

  Eigen::VectorXd lambda(points);
  for (int j = 0; j < points; ++j) lambda[j] = -kPi + h * j;
  // cos/sin tables for lags 0..p-1
  Eigen::MatrixXd cos_tab(points, p), sin_tab(points, p);
  for (int t = 0; t < p; ++t) {
    cos_tab.col(t) = (lambda.array() * t).cos();
    sin_tab.col(t) = (lambda.array() * t).sin();
  }
  // The 2p-1 circulant frequencies are checked alongside the grid so the
  // result also passes the tabulated-kernel validation.
  const int m = 2 * p - 1;
  Eigen::MatrixXd cos_chk(m, p);
  for (int j = 0; j < m; ++j) {
    for (int t = 0; t < p; ++t) cos_chk(j, t) = std::cos(2.0 * kPi * t * j / m);
  }

  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(kappa.data(), p);
  double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  const auto spectrum_on = [&](const Eigen::MatrixXd& cos_rows) {
    Eigen::VectorXd f = cos_rows.col(0) * v[0];
    for (int t = 1; t < p; ++t) f += cos_rows.col(t) * (2.0 * v[t]);
    return Eigen::VectorXd((f / (2.0 * kPi)).eval());
  };

  // Clip-and-truncate passes. Near tangential fixed points the alternating
  // scheme slows to O(1/n^2), so after the pass budget any residual deficit
  // is removed exactly by lifting the lag-0 value (a uniform spectral shift).
  constexpr int kMaxPasses = 3000;
  for (int pass = 0; pass <= kMaxPasses; ++pass) {
    Eigen::VectorXd f = spectrum_on(cos_tab);
    const double min_f = std::min(f.minCoeff(), spectrum_on(cos_chk).minCoeff());
    if (min_f >= -1e-10 * scale || pass == kMaxPasses) break;

    Eigen::VectorXd clipped = f.cwiseMax(0.0);
    clipped[0] *= 0.5;  // trapezoid end weights
    clipped[points - 1] *= 0.5;
    for (int t = 0; t < p; ++t) {
      const double imag = sin_tab.col(t).dot(clipped) * h;
      if (std::abs(imag) >= 1e-8 * scale) {
        throw Error("spectral-asymmetry", "imaginary residue above tolerance");
      }
      v[t] = cos_tab.col(t).dot(clipped) * h;
    }
    scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  }

  const double true_min = std::min(refined_spectrum_min(v, lambda, spectrum_on(cos_tab)),
                                   spectrum_on(cos_chk).minCoeff());
  if (true_min < -1e-11 * scale) {
    v[0] += 2.0 * kPi * (-true_min) * (1.0 + 1e-6) + 1e-13 * scale;
  }

  std::vector<double> out(v.data(), v.data() + p);
  return PeriodicKernel::tabulated(p, std::move(out));
}

PeriodicKernel ParametricFamily::make(int period, double theta, double sigma2) const {
  switch (form) {
    case KernelForm::MacKay:
      return PeriodicKernel::mackay(period, theta, sigma2);
    case KernelForm::Matern:
      return PeriodicKernel::matern(period, nu, theta, sigma2);
    case KernelForm::Cosine:
      return PeriodicKernel::cosine(period, static_cast<int>(std::lround(theta)), sigma2);
  }
  throw Error("bad-kernel-spec", "unknown family");
}

std::string ParametricFamily::name() const {
  switch (form) {
    case KernelForm::MacKay:
      return "mackay";
    case KernelForm::Matern:
      return "matern";
    case KernelForm::Cosine:
      return "cosine";
  }
  return "unknown";
}

namespace {

// Frobenius inner products against the unit-variance Toeplitz matrix reduce
// to the per-lag diagonal sums of the target.
struct DiagonalSums {
  Eigen::VectorXd target_diag;  // sum over j of T(j, j+t), t = 0..p-1
  Eigen::VectorXd counts;       // p - t
  double target_norm2;
};

DiagonalSums diagonal_sums(const Eigen::MatrixXd& target) {
  const int p = static_cast<int>(target.rows());
  DiagonalSums d{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p), target.squaredNorm()};
  for (int t = 0; t < p; ++t) {
    double s = 0.0;
    for (int j = 0; j + t < p; ++j) s += target(j, j + t);
    d.target_diag[t] = s;
    d.counts[t] = p - t;
  }
  return d;
}

// Squared residual of the best sigma2-scaled unit kernel with lag values b.
struct ScaledResidual {
  double sigma2;
  double residual2;
};

ScaledResidual best_scale(const DiagonalSums& d, const Eigen::VectorXd& b) {
  const int p = static_cast<int>(b.size());
  double tb = d.target_diag[0] * b[0];
  double bb = d.counts[0] * b[0] * b[0];
  for (int t = 1; t < p; ++t) {
    tb += 2.0 * d.target_diag[t] * b[t];
    bb += 2.0 * d.counts[t] * b[t] * b[t];
  }
  double s2 = tb / bb;
  if (!(s2 > 0.0) || !std::isfinite(s2)) s2 = 1e-12;
  const double r2 = d.target_norm2 - 2.0 * s2 * tb + s2 * s2 * bb;
  return {s2, std::max(r2, 0.0)};
}

Eigen::VectorXd unit_lags(const ParametricFamily& family, int p, double theta) {
  PeriodicKernel k = family.make(p, theta, 1.0);
  Eigen::VectorXd b(p);
  for (int t = 0; t < p; ++t) b[t] = k.evaluate(t);
  return b;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

FrobeniusFit frobenius_project(const Eigen::MatrixXd& target, const ParametricFamily& family) {
  if (target.rows() != target.cols() || target.rows() < 1) {
    throw Error("bad-search-spec", "target must be a square matrix");
  }
  const int p = static_cast<int>(target.rows());
  const DiagonalSums sums = diagonal_sums(target);

  if (family.form == KernelForm::Cosine) {
    // iota is an integer; distinct tables exist only for 1..floor(p/2).
    const int iota_max = std::max(1, p / 2);
    int best_iota = 1;
    ScaledResidual best{1.0, std::numeric_limits<double>::infinity()};
    for (int iota = 1; iota <= iota_max; ++iota) {
      ParametricFamily probe = family;
      const ScaledResidual r =
          best_scale(sums, unit_lags(probe, p, static_cast<double>(iota)));
      if (r.residual2 < best.residual2) {
        best = r;
        best_iota = iota;
      }
    }
    return {PeriodicKernel::cosine(p, best_iota, best.sigma2), static_cast<double>(best_iota),
            best.sigma2, std::sqrt(best.residual2)};
  }

  if (!(family.theta_min > 0.0) || !(family.theta_max > family.theta_min) ||
      family.coarse_points < 2) {
    throw Error("bad-search-spec", "invalid theta search grid");
  }

  const auto objective = [&](double log_theta) {
    return best_scale(sums, unit_lags(family, p, std::exp(log_theta))).residual2;
  };

  // Coarse log-spaced grid, then two golden-section refinement passes on the
  // bracketing interval.
  const int nc = family.coarse_points;
  const double llo = std::log(family.theta_min), lhi = std::log(family.theta_max);
  int best_i = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nc; ++i) {
    const double lt = llo + (lhi - llo) * i / (nc - 1);
    const double val = objective(lt);
    if (val < best_val) {
      best_val = val;
      best_i = i;
    }
  }
  const double step = (lhi - llo) / (nc - 1);
  double a = llo + step * std::max(0, best_i - 1);
  double b = llo + step * std::min(nc - 1, best_i + 1);
  double lt = golden_min(objective, a, b, 24);
  const double width = (b - a) * std::pow((std::sqrt(5.0) - 1.0) / 2.0, 24);
  lt = golden_min(objective, lt - width, lt + width, 24);

  const double theta = std::exp(lt);
  const ScaledResidual r = best_scale(sums, unit_lags(family, p, theta));
  return {family.make(p, theta, r.sigma2), theta, r.sigma2, std::sqrt(r.residual2)};
}

}  // namespace qpgp
