#include "impact/calibration.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace impact;

namespace {

LagCurve curve_from(Index max_lag, auto f) {
  LagCurve c(max_lag);
  for (Index l = 0; l <= max_lag; ++l) {
    c.values[l] = f(l);
    c.counts[l] = 1000;
    c.std_error[l] = 0.01 * std::abs(c.values[l]) + 1e-12;
  }
  return c;
}

LagCurve iid_corr(Index max_lag) {
  return curve_from(max_lag, [](Index l) { return l == 0 ? 1.0 : 0.0; });
}

Eigen::ArrayXd pareto(Index n, double mu, double xmin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::ArrayXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = xmin * std::pow(1.0 - u(rng), -1.0 / mu);
  return x;
}

}  // namespace

TEST_CASE("independent signs: calibrated kernel is the response over K") {
  const Index L = 40;
  const LagCurve r = curve_from(L, [](Index l) { return l == 0 ? 0.0 : 2.0 * std::pow(l, -0.3); });
  const KernelCalibration cal = calibrate_kernel(r, iid_corr(2 * L), 2.0, L, 0.0);
  for (Index l = 1; l <= L; ++l) CHECK(cal.kernel.at(l) == doctest::Approx(std::pow(l, -0.3)));
  CHECK(cal.rank == L);
  CHECK(cal.residual_norm < 1e-10);
}

TEST_CASE("response_operator reproduces predicted_response") {
  const Index L = 30;
  const LagCurve c = curve_from(2 * L, [](Index l) { return l == 0 ? 1.0 : 0.3 * std::pow(l, -0.5); });
  const Kernel k = make_kernel(PowerLawKernel{1.0, 0.25, 0.0}, L);
  const Eigen::VectorXd viaA = response_operator(c, L) * k.g.matrix();
  const LagCurve pred = predicted_response(k, c, ModelParams{}, L);
  for (Index l = 1; l <= L; ++l) CHECK(viaA[l - 1] == doctest::Approx(pred.values[l]));
}

TEST_CASE("noiseless inversion recovers a planted kernel; ridge selection under noise") {
  const Index L = 60;
  const LagCurve c = curve_from(2 * L, [](Index l) { return l == 0 ? 1.0 : 0.3 * std::pow(l, -0.5); });
  const Kernel k = make_kernel(PowerLawKernel{1.0, 0.25, 0.0}, L);
  LagCurve r = predicted_response(k, c, ModelParams{}, L);
  r.values[0] = 0.0;
  const KernelCalibration exact = calibrate_kernel(r, c, 1.0, L, 0.0);
  CHECK((exact.kernel.g - k.g).abs().maxCoeff() < 1e-9);
  CHECK(exact.condition_number > 1.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  LagCurve noisy = r;
  double nn = 0.0;
  for (Index l = 1; l <= L; ++l) {
    const double e = 0.01 * r.values[l] * z(rng);
    noisy.values[l] += e;
    nn += e * e;
  }
  const double ridge = select_ridge_discrepancy(noisy, c, 1.0, L, std::sqrt(nn));
  CHECK(ridge > 0.0);
  const KernelCalibration reg = calibrate_kernel(noisy, c, 1.0, L, ridge);
  const double rel = std::sqrt((reg.kernel.g - k.g).square().mean()) / std::sqrt(k.g.square().mean());
  CHECK(rel < 0.1);
  const KernelCalibration reg2 = calibrate_kernel(noisy, c, 1.0, L, ridge, 2);
  CHECK(reg2.kernel.truncation() == L);
}

TEST_CASE("calibration preconditions") {
  const LagCurve c = iid_corr(20);
  const LagCurve r = curve_from(10, [](Index l) { return 1.0 / (1.0 + l); });
  CHECK_THROWS_AS(calibrate_kernel(r, c, 1.0, 20, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_kernel(r, c, 0.0, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_kernel(r, c, 1.0, 10, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_kernel(r, c, 1.0, 10, 0.1, 3), std::invalid_argument);
  // Perfectly correlated signs make the operator vanish.
  const LagCurve ones = curve_from(20, [](Index) { return 1.0; });
  CHECK_THROWS_AS(calibrate_kernel(r, ones, 1.0, 10, 0.0), NumericError);
}

TEST_CASE("fit_powerlaw on exact curves") {
  const LagCurve a = curve_from(1000, [](Index l) { return l == 0 ? kNaN : 3.0 * std::pow(l, -0.7); });
  const FitResult f = fit_powerlaw(a, 1, 1000);
  CHECK(f.exponent == doctest::Approx(-0.7));
  CHECK(f.amplitude == doctest::Approx(3.0));
  CHECK(f.range_lo == 1);
  CHECK(f.range_hi == 1000);
  CHECK(f.points == 1000);

  for (auto w : {FitWeighting::None, FitWeighting::RelativeValue, FitWeighting::InverseVariance}) {
    const FitResult b = fit_powerlaw(a, 10, 500, {OffsetMode::None, 12, w});
    CHECK(b.exponent == doctest::Approx(-0.7).epsilon(1e-3));
  }

  const LagCurve off = curve_from(1000, [](Index l) { return l == 0 ? kNaN : 1.0 + 1.0 / l; });
  const FitResult g = fit_powerlaw(off, 1, 1000, {OffsetMode::FitAsymptote, 0, FitWeighting::None});
  CHECK(g.asymptote == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(g.exponent == doctest::Approx(-1.0).epsilon(1e-2));
}

TEST_CASE("fit_powerlaw recovers a relaxation exponent under 10% noise") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z(0.0, 1.0);
  LagCurve c(300);
  for (Index l = 1; l <= 300; ++l) {
    const double y = 0.5 + 2.0 * std::pow(l, -0.5);
    c.values[l] = y * (1.0 + 0.1 * z(rng));
    c.counts[l] = 100;
    c.std_error[l] = 0.1 * y;
  }
  const FitResult f = fit_powerlaw(c, 1, 300, {OffsetMode::FitAsymptote, 24, FitWeighting::InverseVariance});
  CHECK(std::abs(-f.exponent - 0.5) < 0.1);
}

TEST_CASE("fit_powerlaw scaling invariance") {
  const LagCurve a = curve_from(400, [](Index l) { return l == 0 ? kNaN : 0.5 * std::pow(l, -0.4) * (1.0 + 0.05 * std::sin(l)); });
  LagCurve b = a;
  b.values *= 7.3;
  b.std_error *= 7.3;
  const FitResult fa = fit_powerlaw(a, 2, 400, {OffsetMode::None, 10, FitWeighting::RelativeValue});
  const FitResult fb = fit_powerlaw(b, 2, 400, {OffsetMode::None, 10, FitWeighting::RelativeValue});
  CHECK(fb.exponent == doctest::Approx(fa.exponent).epsilon(1e-12));
  CHECK(fb.amplitude == doctest::Approx(7.3 * fa.amplitude).epsilon(1e-12));
}

TEST_CASE("fit_powerlaw preconditions") {
  const LagCurve a = curve_from(100, [](Index l) { return 1.0 / (1.0 + l); });
  CHECK_THROWS_AS(fit_powerlaw(a, 0, 50), std::invalid_argument);
  CHECK_THROWS_AS(fit_powerlaw(a, 50, 10), std::invalid_argument);
  CHECK_THROWS_AS(fit_powerlaw(a, 10, 101), std::invalid_argument);
  const LagCurve neg = curve_from(100, [](Index l) { return l % 2 ? 1.0 : -1.0; });
  CHECK_THROWS(fit_powerlaw(neg, 1, 100));
}

TEST_CASE("Hill estimator") {
  SUBCASE("Pareto tail") {
    const FitResult f = hill_tail(pareto(100'000, 4.0, 1.0, 1), 1000);
    CHECK(std::abs(f.exponent - 4.0) < 0.4);
    CHECK(f.stderr_exponent == doctest::Approx(f.exponent / std::sqrt(1000.0)));
    CHECK(f.range_lo == 1);
    CHECK(f.range_hi == 1000);
  }
  SUBCASE("Student-t with three degrees of freedom") {
    std::mt19937_64 rng(2);
    std::student_t_distribution<double> t(3.0);
    Eigen::ArrayXd x(1'000'000);
    for (Index i = 0; i < x.size(); ++i) x[i] = std::abs(t(rng));
    const FitResult f = hill_tail(x, 2000);
    CHECK(std::abs(f.exponent - 3.0) < 0.3);
  }
  SUBCASE("exponential tails give a drifting estimate") {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    Eigen::ArrayXd x(200'000);
    for (Index i = 0; i < x.size(); ++i) x[i] = e(rng);
    const auto plot = hill_plot(x, {20'000, 2000, 200});
    REQUIRE(plot.size() == 3);
    CHECK(plot[0].second < plot[1].second);
    CHECK(plot[1].second < plot[2].second);
  }
  SUBCASE("scale invariance") {
    const Eigen::ArrayXd x = pareto(10'000, 3.0, 1.0, 4);
    const FitResult a = hill_tail(x, 500);
    CHECK(hill_tail(x * 8.0, 500).exponent == a.exponent);
    CHECK(hill_tail(x * 3.7, 500).exponent == doctest::Approx(a.exponent).epsilon(1e-12));
  }
  SUBCASE("invalid requests") {
    const Eigen::ArrayXd x = pareto(1000, 3.0, 1.0, 5);
    CHECK_THROWS_AS(hill_tail(x, 10), std::invalid_argument);
    CHECK_THROWS_AS(hill_tail(x, 1000), std::invalid_argument);
    CHECK_THROWS_AS(hill_tail(Eigen::ArrayXd::Ones(100), 50), NumericError);
    // Zeros are not tail samples; they only count against k.
    Eigen::ArrayXd with_zero = x;
    with_zero.head(990).setZero();
    CHECK_THROWS_AS(hill_tail(with_zero, 20), std::invalid_argument);
  }
}

TEST_CASE("volatility decomposition") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  std::normal_distribution<double> z(0.0, 1.0);
  const Index n = 200;
  Eigen::ArrayXd r1(n), s0(n), s(n);
  for (Index i = 0; i < n; ++i) {
    r1[i] = u(rng) * u(rng) + 1e-3;
    s0[i] = 10.0 * r1[i];
    s[i] = s0[i] * (1.0 + 0.05 * z(rng));
  }
  const VolDecomposition exact = vol_decomposition(s0, r1);
  CHECK(exact.A == doctest::Approx(10.0));
  CHECK(std::abs(exact.J2) < 1e-10);
  CHECK(exact.impact_dominated);
  CHECK(exact.r2 == doctest::Approx(1.0));

  // Negative unconstrained intercept is pinned at zero.
  Eigen::ArrayXd below = s0 - 0.001;
  below = below.max(1e-6);
  const VolDecomposition pinned = vol_decomposition(below, r1, RegressionWeighting::Ordinary);
  CHECK(pinned.J2 == 0.0);
  CHECK(pinned.intercept_clamped);

  const VolDecomposition noisy = vol_decomposition(s + 0.05, r1);
  CHECK(noisy.A == doctest::Approx(10.0).epsilon(0.1));
  CHECK(noisy.J2 == doctest::Approx(0.05).epsilon(0.2));
  CHECK(noisy.jump_share == doctest::Approx(noisy.J2 / (s + 0.05).mean()));

  CHECK_THROWS_AS(vol_decomposition(s, Eigen::ArrayXd::Constant(n, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(vol_decomposition(s.head(10), r1), std::invalid_argument);
}
