#include "impact/calibration.hpp"
#include "impact/surprise.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace impact;

namespace {

SignSeries iid_signs(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Eigen::ArrayXd s(n);
  for (Index i = 0; i < n; ++i) s[i] = coin(rng) ? 1.0 : -1.0;
  return SignSeries(s);
}

// Lag-l autocorrelation of a real series.
double autocorr(const Eigen::ArrayXd& x, Index l) {
  const Eigen::ArrayXd y = x - x.mean();
  const Index m = y.size() - l;
  return (y.head(m) * y.tail(m)).mean() / y.square().mean();
}

}  // namespace

TEST_CASE("filter of independent signs is near zero") {
  const Index n = 200'000;
  const LinearFilter f = fit_linear_predictor(iid_signs(n, 1), 20);
  CHECK(f.order() == 20);
  CHECK(f.b.abs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("Markov signs give a one-tap filter") {
  const double p = 0.8;
  const LinearFilter f = fit_linear_predictor(gen_markov_signs(300'000, p, 2), 5);
  CHECK(f.b[0] == doctest::Approx(2 * p - 1).epsilon(0.02));
  CHECK(f.b.tail(4).abs().maxCoeff() < 0.01);
}

TEST_CASE("Levinson solution satisfies the Yule-Walker system") {
  const SignSeries s = gen_signs(100'000, 0.5, 0.3, 5);
  const Index M = 30;
  const LagCurve c = estimate_sign_corr(s, M);
  const LinearFilter f = linear_predictor_from_corr(c, M);
  Eigen::MatrixXd T(M, M);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < M; ++j) T(i, j) = c.values[std::abs(i - j)];
  const Eigen::VectorXd rhs = c.values.segment(1, M).matrix();
  CHECK((T * f.b.matrix() - rhs).norm() < 1e-10);
  CHECK(f.gain_bound() == doctest::Approx(f.b.abs().sum()));
}

TEST_CASE("linear predictor beats a coin on correlated signs") {
  const SignSeries s = gen_signs(200'000, 0.5, 0.3, 6);
  const LinearFilter f = fit_linear_predictor(s, 50);
  const Eigen::ArrayXd hat = predict_signs(s, f);
  CHECK(hat[0] == 0.0);
  Index hit = 0, used = 0;
  for (Index t = 50; t < s.size(); ++t) {
    if (hat[t] == 0.0) continue;
    ++used;
    if ((hat[t] > 0) == (s[t] > 0)) ++hit;
  }
  CHECK(static_cast<double>(hit) / used > 0.55);
}

TEST_CASE("surprise price special cases") {
  const SignSeries s = iid_signs(1000, 3);
  SUBCASE("zero filter is a random walk of the signs") {
    const PriceSeries p = surprise_price(s, LinearFilter{Eigen::ArrayXd::Zero(5)}, 0.5, 10.0);
    double x = 10.0;
    for (Index t = 0; t < s.size(); ++t) {
      CHECK(p.mid[t] == doctest::Approx(x));
      x += 0.5 * s[t];
    }
  }
  SUBCASE("perfectly predicted signs leave the price constant") {
    const SignSeries ones(Eigen::ArrayXd::Ones(100));
    const PriceSeries p = surprise_price(ones, LinearFilter{(Eigen::ArrayXd(1) << 1.0).finished()}, 1.0, 3.0);
    // The first trade has no history and is a full surprise.
    CHECK(p.mid[0] == 3.0);
    CHECK((p.mid.tail(99) == 4.0).all());
  }
}

TEST_CASE("kernel_from_filter examples") {
  const Kernel zero = kernel_from_filter(LinearFilter{Eigen::ArrayXd::Zero(4)}, 1.0);
  CHECK((zero.g == 1.0).all());
  CHECK(zero.tail == 1.0);

  const Kernel k = kernel_from_filter(LinearFilter{(Eigen::ArrayXd(2) << 0.3, 0.0).finished()}, 1.0);
  REQUIRE(k.truncation() == 3);
  CHECK(k.g[0] == doctest::Approx(1.0));
  CHECK(k.g[1] == doctest::Approx(0.7));
  CHECK(k.g[2] == doctest::Approx(0.7));
  CHECK(k.at(100) == doctest::Approx(0.7));
}

TEST_CASE("filter-derived kernel reproduces the surprise price") {
  const SignSeries s = gen_signs(5000, 0.5, 0.3, 7);
  const LinearFilter f = fit_linear_predictor(s, 40);
  const double g1 = 0.8;
  const PriceSeries a = surprise_price(s, f, g1, 1.0);
  const PriceSeries b = build_price(s, kernel_from_filter(f, g1), 1.0, ConvolutionMethod::Direct);
  CHECK((a.mid - b.mid).abs().maxCoeff() < 1e-9);
}

TEST_CASE("filter and kernel round trip") {
  const LinearFilter f{(Eigen::ArrayXd(4) << 0.2, 0.1, -0.05, 0.02).finished()};
  const LinearFilter back = filter_from_kernel(kernel_from_filter(f, 0.6));
  REQUIRE(back.order() == 4);
  CHECK((back.b - f.b).abs().maxCoeff() < 1e-14);

  const LinearFilter perm = filter_from_kernel(make_kernel(PermanentKernel{2.0}, 20));
  CHECK((perm.b == 0.0).all());

  // A decaying kernel corresponds to positive taps.
  const LinearFilter pl = filter_from_kernel(make_kernel(PowerLawKernel{1.0, 0.3, 0.0}, 50));
  CHECK((pl.b > 0.0).all());
}

TEST_CASE("filter from long-memory signs gives a kernel decaying at the critical rate") {
  const SignSeries s = gen_signs(1'000'000, 0.5, 0.3, 8);
  const Kernel k = kernel_from_filter(fit_linear_predictor(s, 512), 1.0);
  // Excess over the asymptotic level decays as l^-beta.
  LagCurve g(512);
  g.values.setConstant(kNaN);
  for (Index l = 1; l <= 512; ++l) g.values[l] = k.at(l);
  const FitResult f = fit_powerlaw(g, 5, 300);
  CHECK(-f.exponent == doctest::Approx(critical_beta(0.5)).epsilon(0.2));
}

TEST_CASE("surprise price increments are uncorrelated") {
  const SignSeries s = gen_signs(300'000, 0.5, 0.3, 9);
  const PriceSeries p = surprise_price(s, fit_linear_predictor(s, 100), 1.0);
  const Index n = p.size();
  const Eigen::ArrayXd r = p.mid.tail(n - 1) - p.mid.head(n - 1);
  const double bound = 4.0 / std::sqrt(static_cast<double>(n));
  for (Index l = 1; l <= 50; ++l) CHECK(std::abs(autocorr(r, l)) < bound);
}

TEST_CASE("conditional impacts") {
  CHECK(balanced_reversal_impact(0.6, 1.0) == doctest::Approx(1.5));
  CHECK(balanced_reversal_impact(0.5, 0.3) == doctest::Approx(0.3));
  CHECK_THROWS_AS(balanced_reversal_impact(1.0, 1.0), std::invalid_argument);

  SUBCASE("symmetric dynamics: permanent impact on independent signs") {
    const SignSeries s = iid_signs(200'000, 11);
    const auto rep = conditional_impact(build_price(s, make_kernel(PermanentKernel{0.5}, 5)), s);
    CHECK(rep.p_plus == doctest::Approx(0.5).epsilon(0.01));
    CHECK(rep.g_plus == doctest::Approx(0.5));
    CHECK(rep.g_minus == doctest::Approx(0.5));
    CHECK(std::abs(rep.balance) < 4.0 * rep.balance_stderr + 1e-12);
    CHECK(rep.samples_same + rep.samples_reversed == s.size() - 2);
  }
  SUBCASE("filter-derived kernel balances, permanent kernel does not") {
    const SignSeries s = gen_signs(300'000, 0.5, 0.3, 12);
    const auto crit = conditional_impact(surprise_price(s, fit_linear_predictor(s, 200), 1.0), s);
    CHECK(std::abs(crit.balance / crit.balance_stderr) < 3.0);
    const auto perm = conditional_impact(build_price(s, make_kernel(PermanentKernel{1.0}, 5)), s);
    CHECK(perm.p_plus > 0.6);
    CHECK(perm.balance / perm.balance_stderr > 10.0);
  }
}

TEST_CASE("predictor preconditions") {
  const SignSeries s = iid_signs(100, 1);
  CHECK_THROWS_AS(fit_linear_predictor(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_linear_predictor(s, 100), std::invalid_argument);
  CHECK_THROWS_AS(fit_linear_predictor(SignSeries(Eigen::ArrayXd::Ones(100)), 3), NumericError);
}
