#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "qpgp/block_cov.hpp"
#include "qpgp/error.hpp"
#include "qpgp/kernel.hpp"

using namespace qpgp;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

TEST_CASE("mackay kernel values") {
  const auto k = PeriodicKernel::mackay(10, 1.0, 1.0);
  CHECK(k.evaluate(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k.evaluate(5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  // periodicity: lag 13 reduces to lag 3
  CHECK(k.evaluate(13) == k.evaluate(3));
}

TEST_CASE("cosine kernel zero crossing") {
  const auto k = PeriodicKernel::cosine(8, 1, 2.0);
  CHECK(std::abs(k.evaluate(2)) < 1e-12);
}

TEST_CASE("matern closed forms match the Bessel expression") {
  // sigma2 2^{1-nu}/Gamma(nu) phi^nu K_nu(phi) with the sine warping
  auto rng = test::make_rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = test::uniform_int(rng, 2, 17);
    const double nus[] = {0.5, 1.5, 2.5};
    const double nu = nus[test::uniform_int(rng, 0, 2)];
    const double theta = test::uniform(rng, 0.3, 3.0);
    const double sigma2 = test::uniform(rng, 0.5, 2.0);
    const auto k = PeriodicKernel::matern(p, nu, theta, sigma2);
    for (long t = 1; t < p; ++t) {
      const double s2 = std::pow(std::sin(kPi * t / p), 2);
      const double phi = 2.0 / theta * std::sqrt(2.0 * nu * s2);
      if (phi == 0.0) continue;
      const double ref = sigma2 * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) *
                         std::pow(phi, nu) * std::cyl_bessel_k(nu, phi);
      CHECK(k.evaluate(t) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("matern rejects unsupported nu") {
  CHECK(test::error_code_of([] { PeriodicKernel::matern(5, 2.0, 1.0, 1.0); }) ==
        "matern-nu-unsupported");
}

TEST_CASE("parametric kernels are even and periodic at every lag") {
  auto rng = test::make_rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const int p = test::uniform_int(rng, 1, 23);
    const auto k = test::random_kernel(p, rng, test::uniform_int(rng, 0, 2));
    const long t = test::uniform_int(rng, -100, 100);
    CHECK(k.evaluate(t) == k.evaluate(-t));
    CHECK(k.evaluate(t) == k.evaluate(t + p));
    CHECK(k.evaluate(t) == k.evaluate(t - 3 * p));
  }
}

TEST_CASE("parametric kernels have evaluate(0) == sigma2") {
  auto rng = test::make_rng(7);
  for (int rep = 0; rep < 60; ++rep) {
    const int p = test::uniform_int(rng, 2, 19);
    const double sigma2 = test::uniform(rng, 0.2, 3.0);
    const double theta = test::uniform(rng, 0.3, 3.0);
    CHECK(PeriodicKernel::mackay(p, theta, sigma2).evaluate(0) == sigma2);
    CHECK(PeriodicKernel::matern(p, 1.5, theta, sigma2).evaluate(0) == sigma2);
    CHECK(PeriodicKernel::cosine(p, 1, sigma2).evaluate(0) == sigma2);
  }
}

TEST_CASE("tabulated kernels are validated against the circulant spectrum") {
  CHECK_NOTHROW(PeriodicKernel::tabulated(2, {1.0, 0.0}));
  auto rng = test::make_rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    CHECK_NOTHROW(test::random_psd_tabulated(test::uniform_int(rng, 1, 16), rng));
  }
  // the raw cosine table at p=4 has a negative circulant frequency
  CHECK(test::error_code_of([] { PeriodicKernel::tabulated(4, {1.0, 0.0, -1.0, 0.0}); }) ==
        "kernel-not-positive-definite");
  CHECK(test::error_code_of([] { PeriodicKernel::tabulated(4, {1.0, 0.0}); }) ==
        "bad-kernel-spec");
}

TEST_CASE("tabulated evaluation is even and uses stored lags") {
  auto rng = test::make_rng(5);
  const auto k = test::random_psd_tabulated(6, rng);
  for (long t = 0; t < 6; ++t) {
    CHECK(k.evaluate(t) == k.evaluate(-t));
    CHECK(k.evaluate(t) == k.evaluate(t + 6));
  }
}

// ---------------------------------------------------------------------------
// BlockCov
// ---------------------------------------------------------------------------

TEST_CASE("block_cov of the white tabulated kernel is the identity") {
  const BlockCov cov{PeriodicKernel::tabulated(2, {1.0, 0.0})};
  CHECK(cov.matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  CHECK(cov.logdet() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(cov.jitter() == 0.0);
}

TEST_CASE("block_cov entries equal kernel evaluations before jitter") {
  const auto k = PeriodicKernel::mackay(3, 1.0, 1.0);
  const BlockCov cov{k};
  CHECK(cov.jitter() == 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(cov.matrix()(i, j) == k.evaluate(i - j));
    }
  }
  const double off = std::exp(-std::pow(std::sin(kPi / 3.0), 2));
  CHECK(cov.matrix()(1, 0) == doctest::Approx(off).epsilon(1e-14));

  auto rng = test::make_rng(9);
  for (int rep = 0; rep < 40; ++rep) {
    const int p = test::uniform_int(rng, 1, 14);
    const auto kr = test::random_kernel(p, rng);
    const BlockCov c{kr};
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        const double raw = c.matrix()(i, j) - (i == j ? c.jitter() : 0.0);
        CHECK(raw == doctest::Approx(kr.evaluate(i - j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cosine kernel covariance is rank deficient and takes jitter") {
  const auto k = PeriodicKernel::cosine(4, 1, 1.0);
  Eigen::MatrixXd raw(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) raw(i, j) = k.evaluate(i - j);
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(raw).eigenvalues();
  CHECK(std::abs(eig[0]) < 1e-12);
  CHECK(std::abs(eig[1]) < 1e-12);
  CHECK(eig[2] == doctest::Approx(2.0));
  CHECK(eig[3] == doctest::Approx(2.0));

  const BlockCov cov{k};
  CHECK(cov.jitter() > 0.0);
  CHECK(std::isfinite(cov.logdet()));
}

TEST_CASE("cached factor reproduces the matrix") {
  auto rng = test::make_rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = test::uniform_int(rng, 1, 16);
    const BlockCov cov{test::random_kernel(p, rng)};
    const Eigen::MatrixXd rebuilt = cov.chol() * cov.chol().transpose();
    CHECK((rebuilt - cov.matrix()).norm() <= 1e-10 * cov.matrix().norm());
  }
}

TEST_CASE("leading principal helpers agree with direct factorization") {
  auto rng = test::make_rng(33);
  const BlockCov cov{test::random_kernel(8, rng, 0)};
  Eigen::VectorXd x(5);
  for (int i = 0; i < 5; ++i) x[i] = test::uniform(rng, -1.0, 1.0);
  const Eigen::MatrixXd sub = cov.matrix().topLeftCorner(5, 5);
  const Eigen::LLT<Eigen::MatrixXd> llt(sub);
  CHECK(cov.leading_quad(5, x) == doctest::Approx(x.dot(llt.solve(x))).epsilon(1e-12));
  CHECK(cov.leading_logdet(5) ==
        doctest::Approx(std::log(sub.determinant())).epsilon(1e-10));
}

// ---------------------------------------------------------------------------
// spectral_project
// ---------------------------------------------------------------------------

TEST_CASE("white sequence passes through unchanged") {
  std::vector<double> kappa{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const auto out = test::tabulated_values(spectral_project(6, kappa));
  for (int t = 0; t < 6; ++t) {
    CHECK(out[static_cast<std::size_t>(t)] ==
          doctest::Approx(kappa[static_cast<std::size_t>(t)]).epsilon(1e-12));
  }
}

TEST_CASE("clipped projection matches the dense quadrature oracle") {
  // kappa(0)=1, kappa(+-1)=1 at p=2: the spectrum (1 + 2 cos)/2pi is negative
  // near pi and must be clipped.
  const auto out = test::tabulated_values(spectral_project(2, {1.0, 1.0}));
  const auto oracle = test::spectral_project_oracle(2, {1.0, 1.0});
  CHECK(out[0] == doctest::Approx(oracle[0]).epsilon(1e-5));
  CHECK(out[1] == doctest::Approx(oracle[1]).epsilon(1e-5));
  // clipping moves mass onto the diagonal; the limit sits on the PSD
  // boundary kappa(1) = kappa(0)/2
  CHECK(out[0] > 1.3);
  CHECK(std::abs(out[0] - 2.0 * out[1]) < 2e-5);

  // a wider asymmetric case
  const std::vector<double> kappa{2.0, 1.4, -0.9, 0.6};
  const auto out4 = test::tabulated_values(spectral_project(4, kappa));
  const auto oracle4 = test::spectral_project_oracle(4, kappa);
  for (int t = 0; t < 4; ++t) {
    CHECK(out4[static_cast<std::size_t>(t)] ==
          doctest::Approx(oracle4[static_cast<std::size_t>(t)]).epsilon(2e-5));
  }
}

TEST_CASE("projection is idempotent") {
  auto rng = test::make_rng(17);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = test::uniform_int(rng, 2, 12);
    std::vector<double> kappa(static_cast<std::size_t>(p));
    for (auto& v : kappa) v = test::uniform(rng, -1.0, 1.5);
    kappa[0] = std::abs(kappa[0]) + 0.5;
    const auto once = test::tabulated_values(spectral_project(p, kappa));
    const auto twice = test::tabulated_values(spectral_project(p, once));
    for (int t = 0; t < p; ++t) {
      CHECK(std::abs(twice[static_cast<std::size_t>(t)] - once[static_cast<std::size_t>(t)]) <
            1e-8);
    }
  }
}

TEST_CASE("projected spectrum is non-negative on the evaluation grid") {
  auto rng = test::make_rng(29);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = test::uniform_int(rng, 2, 12);
    std::vector<double> kappa(static_cast<std::size_t>(p));
    for (auto& v : kappa) v = test::uniform(rng, -1.0, 1.5);
    kappa[0] = std::abs(kappa[0]) + 0.3;
    const auto out = test::tabulated_values(spectral_project(p, kappa));
    double scale = 0.0;
    for (double v : out) scale = std::max(scale, std::abs(v));
    // dense trigonometric check
    const int grid = 20000;
    for (int j = 0; j <= grid; ++j) {
      const double lambda = -kPi + 2.0 * kPi * j / grid;
      double f = out[0];
      for (int t = 1; t < p; ++t) f += 2.0 * out[static_cast<std::size_t>(t)] * std::cos(t * lambda);
      CHECK(f / (2.0 * kPi) >= -1e-9 * scale);
    }
  }
}

// ---------------------------------------------------------------------------
// frobenius_project
// ---------------------------------------------------------------------------

TEST_CASE("exact target is recovered") {
  const BlockCov cov{PeriodicKernel::mackay(10, 1.0, 1.0)};
  const auto fit = frobenius_project(cov.matrix(), ParametricFamily{});
  CHECK(fit.theta == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.residual < 1e-6);

  const auto doubled = frobenius_project(2.0 * cov.matrix(), ParametricFamily{});
  CHECK(doubled.sigma2 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(doubled.theta == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("noisy target recovers parameters against the fine-grid oracle") {
  const BlockCov cov{PeriodicKernel::mackay(10, 1.3, 0.7)};
  auto rng = test::make_rng(101);
  Eigen::MatrixXd target = cov.matrix();
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double noise = 1e-3 * test::uniform(rng, -1.0, 1.0);
      target(i, j) += noise;
      if (i != j) target(j, i) += noise;
    }
  }
  const auto fit = frobenius_project(target, ParametricFamily{});
  CHECK(std::abs(fit.theta - 1.3) < 0.02);
  CHECK(std::abs(fit.sigma2 - 0.7) < 0.02);

  // exhaustive oracle on theta in [0.5, 1.5] step 0.001 with the same
  // closed-form sigma2
  double best_theta = 0.0, best_r = 1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double th = 0.5 + 0.001 * i;
    const BlockCov b{PeriodicKernel::mackay(10, th, 1.0)};
    const double tb = (target.array() * b.matrix().array()).sum();
    const double bb = b.matrix().squaredNorm();
    const double s2 = std::max(tb / bb, 1e-12);
    const double r = (target - s2 * b.matrix()).norm();
    if (r < best_r) {
      best_r = r;
      best_theta = th;
    }
  }
  CHECK(std::abs(fit.theta - best_theta) < 0.005);
  CHECK(fit.residual <= best_r + 1e-9);
}

TEST_CASE("returned residual is grid optimal") {
  auto rng = test::make_rng(55);
  const ParametricFamily family;
  for (int rep = 0; rep < 50; ++rep) {
    const int p = test::uniform_int(rng, 2, 12);
    Eigen::MatrixXd target(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= i; ++j) {
        target(i, j) = target(j, i) = test::uniform(rng, -1.0, 1.0);
      }
    }
    const auto fit = frobenius_project(target, family);
    for (int g = 0; g < family.coarse_points; ++g) {
      const double lt = std::log(family.theta_min) +
                        (std::log(family.theta_max) - std::log(family.theta_min)) * g /
                            (family.coarse_points - 1);
      const BlockCov b{PeriodicKernel::mackay(p, std::exp(lt), 1.0)};
      const double tb = (target.array() * b.matrix().array()).sum();
      const double bb = b.matrix().squaredNorm();
      const double s2 = std::max(tb / bb, 1e-12);
      CHECK(fit.residual <= (target - s2 * b.matrix()).norm() + 1e-9);
    }
  }
}

TEST_CASE("cosine family projection recovers the harmonic") {
  const BlockCov cov{PeriodicKernel::cosine(8, 2, 1.5)};
  ParametricFamily family;
  family.form = KernelForm::Cosine;
  const auto fit = frobenius_project(cov.matrix(), family);
  CHECK(fit.theta == doctest::Approx(2.0));
  CHECK(fit.sigma2 == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("invalid search specs are rejected") {
  const Eigen::MatrixXd target = Eigen::MatrixXd::Identity(4, 4);
  ParametricFamily bad_min;
  bad_min.theta_min = -1.0;
  CHECK(test::error_code_of([&] { frobenius_project(target, bad_min); }) == "bad-search-spec");
  ParametricFamily bad_grid;
  bad_grid.coarse_points = 1;
  CHECK(test::error_code_of([&] { frobenius_project(target, bad_grid); }) == "bad-search-spec");
}
