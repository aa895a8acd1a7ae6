#include "impact/orderflow.hpp"

#include "impact/fft.hpp"
#include "impact/random.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace impact {

SignSeries::SignSeries(Eigen::ArrayXd signs) : signs_(std::move(signs)) {
  require(signs_.size() >= 1, "SignSeries: empty series");
  for (Index i = 0; i < signs_.size(); ++i) {
    if (signs_[i] != 1.0 && signs_[i] != -1.0)
      throw std::invalid_argument("SignSeries: element " + std::to_string(i) + " is not +/-1");
  }
}

SignSeries SignSeries::head(Index m) const {
  require(m >= 1 && m <= size(), "SignSeries::head: length out of range");
  return SignSeries(signs_.head(m));
}

Eigen::ArrayXd MarkSeries::impact_weights() const {
  if (psi == 0.0) return spreads;
  return spreads * volumes.pow(psi);
}

MarkSeries MarkSeries::unit(Index n, double psi) {
  return {Eigen::ArrayXd::Ones(n), Eigen::ArrayXd::Ones(n), psi};
}

void validate(const MarkSeries& marks) {
  require(marks.spreads.size() == marks.volumes.size(), "MarkSeries: spreads and volumes differ in length");
  require((marks.spreads > 0.0).all(), "MarkSeries: spreads must be positive");
  require((marks.volumes > 0.0).all(), "MarkSeries: volumes must be positive");
  require(marks.psi >= 0.0, "MarkSeries: psi must be nonnegative");
}

double law_moment(const MarkLaw& law, double power) {
  return std::visit(
      [power](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantLaw>) {
          return std::pow(l.value, power);
        } else {
          return std::exp(power * l.mu + 0.5 * power * power * l.sigma * l.sigma);
        }
      },
      law);
}

Eigen::ArrayXd circulant_gaussian(Index n, const Eigen::ArrayXd& cov, std::uint64_t seed) {
  require(n >= 1, "circulant_gaussian: n must be positive");
  require(cov.size() >= 1 && cov[0] > 0.0, "circulant_gaussian: cov[0] must be positive");
  const Index m = std::max<Index>(2, fft::next_pow2(2 * (n - 1)));
  const Index half = m / 2;

  Eigen::ArrayXd row = Eigen::ArrayXd::Zero(m);
  for (Index k = 0; k <= half && k < cov.size(); ++k) {
    row[k] = cov[k];
    if (k > 0 && k < half) row[m - k] = cov[k];
  }
  Eigen::ArrayXd lambda = fft::forward(row, m).real();  // half spectrum, symmetric

  double total = 0.0, clipped = 0.0;
  for (Index k = 0; k < lambda.size(); ++k) {
    const double w = (k == 0 || k == half) ? 1.0 : 2.0;
    total += w * std::abs(lambda[k]);
    if (lambda[k] < 0.0) {
      clipped += -w * lambda[k];
      lambda[k] = 0.0;
    }
  }
  if (clipped > 0.01 * total)
    throw NumericError("circulant_gaussian: covariance is not embeddable (negative spectral mass " +
                       std::to_string(clipped / total) + ")");

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> z(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    const Index sym = k <= half ? k : m - k;
    const double scale = std::sqrt(lambda[sym] / static_cast<double>(m));
    const double re = normal(rng);
    const double im = normal(rng);
    z[static_cast<std::size_t>(k)] = {scale * re, scale * im};
  }
  std::vector<std::complex<double>> x;
  Eigen::FFT<double> engine;
  engine.fwd(x, z);

  Eigen::ArrayXd out(n);
  for (Index i = 0; i < n; ++i) out[i] = x[static_cast<std::size_t>(i)].real();
  return out;
}

SignSeries thresholded_gaussian_signs(Index n, const Eigen::ArrayXd& rho, std::uint64_t seed) {
  require(rho.size() >= 1 && rho[0] == 1.0, "thresholded_gaussian_signs: rho[0] must be 1");
  require((rho.abs() <= 1.0).all(), "thresholded_gaussian_signs: correlation outside [-1, 1]");
  const Eigen::ArrayXd g = circulant_gaussian(n, rho, seed);
  return SignSeries((g >= 0.0).select(Eigen::ArrayXd::Ones(n), -1.0));
}

SignSeries gen_signs(Index n, double gamma, double c0, std::uint64_t seed) {
  require(n >= 2, "gen_signs: n must be at least 2");
  require(gamma > 0.0, "gen_signs: gamma must be positive");
  require(c0 > 0.0 && c0 <= 1.0, "gen_signs: c0 must lie in (0, 1]");

  const Index m = std::max<Index>(2, fft::next_pow2(2 * (n - 1)));
  Eigen::ArrayXd rho(m / 2 + 1);
  rho[0] = 1.0;
  for (Index l = 1; l < rho.size(); ++l) {
    const double target = std::isinf(gamma) ? 0.0 : c0 * std::pow(static_cast<double>(l), -gamma);
    // invert the arcsine law (2/pi) asin(rho) = target
    rho[l] = std::sin(0.5 * std::numbers::pi * target);
  }
  if (!(rho.abs() <= 1.0).all())
    throw std::invalid_argument("gen_signs: required Gaussian correlation leaves [-1, 1]");
  return thresholded_gaussian_signs(n, rho, seed);
}

SignSeries gen_markov_signs(Index n, double p_repeat, std::uint64_t seed) {
  require(n >= 1, "gen_markov_signs: n must be positive");
  require(p_repeat >= 0.0 && p_repeat <= 1.0, "gen_markov_signs: p_repeat outside [0, 1]");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution first(0.5), repeat(p_repeat);
  Eigen::ArrayXd s(n);
  s[0] = first(rng) ? 1.0 : -1.0;
  for (Index i = 1; i < n; ++i) s[i] = repeat(rng) ? s[i - 1] : -s[i - 1];
  return SignSeries(std::move(s));
}

namespace {

Eigen::ArrayXd draw(const MarkLaw& law, Index n, Rng& rng) {
  return std::visit(
      [&](const auto& l) -> Eigen::ArrayXd {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantLaw>) {
          require(l.value > 0.0, "gen_marks: constant law must be positive");
          return Eigen::ArrayXd::Constant(n, l.value);
        } else {
          require(l.sigma >= 0.0 && std::isfinite(l.mu), "gen_marks: invalid lognormal law");
          std::lognormal_distribution<double> dist(l.mu, l.sigma);
          Eigen::ArrayXd out(n);
          for (Index i = 0; i < n; ++i) out[i] = dist(rng);
          return out;
        }
      },
      law);
}

}  // namespace

MarkSeries gen_marks(Index n, const MarkLaw& spread_law, const MarkLaw& volume_law, double psi,
                     std::uint64_t seed) {
  require(n >= 1, "gen_marks: n must be positive");
  require(psi >= 0.0, "gen_marks: psi must be nonnegative");
  Rng rng = make_rng(seed);
  MarkSeries marks;
  marks.spreads = draw(spread_law, n, rng);
  marks.volumes = draw(volume_law, n, rng);
  marks.psi = psi;
  return marks;
}

LagCurve estimate_sign_corr(const SignSeries& signs, Index max_lag) {
  const Index n = signs.size();
  require(max_lag >= 0 && max_lag < n, "estimate_sign_corr: max_lag must be below the series length");

  // Products of +/-1 signs sum to integers, so rounding the FFT result
  // recovers the exact sums.
  const Eigen::ArrayXd sums = fft::lagged_products(signs.values(), max_lag).round();

  LagCurve curve(max_lag);
  for (Index l = 0; l <= max_lag; ++l) {
    const Index count = n - l;
    const double mean = sums[l] / static_cast<double>(count);
    curve.values[l] = mean;
    curve.counts[l] = count;
    if (count >= 2) {
      const double var = std::max(0.0, 1.0 - mean * mean) * static_cast<double>(count) / (count - 1.0);
      curve.std_error[l] = std::sqrt(var / static_cast<double>(count));
    }
  }
  curve.values[0] = 1.0;
  return curve;
}

}  // namespace impact
