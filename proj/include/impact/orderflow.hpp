#pragma once

#include "impact/core.hpp"

#include <cstdint>
#include <variant>

namespace impact {

/// Trade signs, one per trade-time index; every entry is exactly -1 or +1.
class SignSeries {
 public:
  explicit SignSeries(Eigen::ArrayXd signs);

  const Eigen::ArrayXd& values() const { return signs_; }
  Index size() const { return signs_.size(); }
  double operator[](Index i) const { return signs_[i]; }

  /// First `m` signs as a new series (m >= 1).
  SignSeries head(Index m) const;

 private:
  Eigen::ArrayXd signs_;
};

/// Per-trade spreads and volumes plus the volume exponent of the impact
/// weight S * V^psi.
struct MarkSeries {
  Eigen::ArrayXd spreads;
  Eigen::ArrayXd volumes;
  double psi = 0.0;

  Index size() const { return spreads.size(); }
  /// S_t * V_t^psi.
  Eigen::ArrayXd impact_weights() const;
  /// Spreads and volumes identically one.
  static MarkSeries unit(Index n, double psi = 0.0);
};

/// Throws std::invalid_argument unless spreads and volumes are positive and
/// aligned.
void validate(const MarkSeries& marks);

struct ConstantLaw {
  double value = 1.0;
};
struct LogNormalLaw {
  double mu = 0.0;
  double sigma = 0.5;
};
using MarkLaw = std::variant<ConstantLaw, LogNormalLaw>;

/// E[X^power] under the law.
double law_moment(const MarkLaw& law, double power);

/// Signs with autocorrelation c0 * l^-gamma for l >= 1: a stationary
/// Gaussian sequence with covariance sin(pi/2 * c0 * l^-gamma) is
/// synthesised by circulant embedding and thresholded at zero. gamma may be
/// +infinity (independent signs).
SignSeries gen_signs(Index n, double gamma, double c0, std::uint64_t seed);

/// Thresholded stationary Gaussian with the given correlation sequence
/// (rho[0] must be 1). Used by gen_signs and by arcsine-law checks.
SignSeries thresholded_gaussian_signs(Index n, const Eigen::ArrayXd& rho, std::uint64_t seed);

/// Stationary Gaussian samples by circulant embedding of the autocovariance
/// `cov` (cov[l] for l = 0..). Negative embedding eigenvalues are clipped;
/// a NumericError is raised when the clipped mass exceeds 1% of the total.
Eigen::ArrayXd circulant_gaussian(Index n, const Eigen::ArrayXd& cov, std::uint64_t seed);

/// First-order Markov signs: each sign repeats its predecessor with
/// probability p_repeat.
SignSeries gen_markov_signs(Index n, double p_repeat, std::uint64_t seed);

MarkSeries gen_marks(Index n, const MarkLaw& spread_law, const MarkLaw& volume_law, double psi,
                     std::uint64_t seed);

/// values[l] = mean over n of eps[n+l] * eps[n], values[0] = 1, with counts
/// and i.i.d. standard errors.
LagCurve estimate_sign_corr(const SignSeries& signs, Index max_lag);

}  // namespace impact
