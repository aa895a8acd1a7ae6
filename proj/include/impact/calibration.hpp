#pragma once

#include "impact/core.hpp"
#include "impact/propagator.hpp"

#include <utility>
#include <vector>

namespace impact {

// ---------------------------------------------------------------- kernels

/// Matrix A with predicted_response(G)(l) = K * (A G)(l) for a kernel that
/// vanishes beyond L: A(l, j) = C(|l - j|) - C(j), l, j = 1..L.
Eigen::MatrixXd response_operator(const LagCurve& corr, Index truncation);

struct KernelCalibration {
  Kernel kernel;
  double condition_number = kNaN;  // of K * A
  double residual_norm = kNaN;     // ||R - R_pred(G)||
  Index rank = 0;
};

/// Least-squares inversion of the response relation,
/// min_G ||R - K A G||^2 + ridge * ||D G||^2 with D the first-difference
/// operator (difference_order 1) or second-difference (2).
KernelCalibration calibrate_kernel(const LagCurve& response_emp, const LagCurve& corr_emp, double K,
                                   Index truncation, double ridge, int difference_order = 1);

/// Ridge weight whose residual norm matches `noise_norm` (discrepancy
/// principle), searched by bisection in log space over [lo, hi]. Returns lo
/// when even the smallest weight cannot reach the target.
double select_ridge_discrepancy(const LagCurve& response_emp, const LagCurve& corr_emp, double K,
                                Index truncation, double noise_norm, int difference_order = 1,
                                double lo = 1e-12, double hi = 1e6);

// ------------------------------------------------------------- power laws

enum class OffsetMode { None, FitAsymptote };

enum class FitWeighting {
  None,            // ordinary least squares on log values
  RelativeValue,   // weight ~ y^2: constant absolute noise on y
  InverseVariance  // weight ~ (y / se)^2 from the curve's standard errors
};

struct PowerLawFitOptions {
  OffsetMode offset = OffsetMode::None;
  /// Average the curve in this many logarithmic lag bins before fitting;
  /// 0 fits every lag.
  Index log_bins = 0;
  FitWeighting weighting = FitWeighting::None;
};

/// Log-log regression of y(l) = asymptote + amplitude * l^exponent over
/// lags [lo, hi]. With OffsetMode::FitAsymptote the asymptote is chosen by a
/// one-dimensional search minimising the log-log residual.
FitResult fit_powerlaw(const LagCurve& curve, Index lo, Index hi, const PowerLawFitOptions& options = {});

// ------------------------------------------------------------------ tails

/// Hill estimator over the k largest samples:
/// mu = k / sum_{i<=k} ln(x_(i) / x_(k+1)), stderr mu / sqrt(k).
/// amplitude holds x_(k+1); range is the order-statistic interval [1, k].
FitResult hill_tail(const Eigen::ArrayXd& samples, Index k);

/// (k, mu_hat) pairs for a Hill plot.
std::vector<std::pair<Index, double>> hill_plot(const Eigen::ArrayXd& samples, const std::vector<Index>& ks);

// ------------------------------------------------------ volatility split

enum class RegressionWeighting { Ordinary, Relative };

struct VolDecomposition {
  double A = kNaN;
  double J2 = kNaN;
  double r2 = kNaN;
  double jump_share = kNaN;  // J2 / mean(sigma1^2)
  bool intercept_clamped = false;
  bool impact_dominated = false;
};

inline constexpr double kImpactDominatedShare = 0.10;

/// sigma1^2 = A * R1^2 + J2 with J2 >= 0. The Relative weighting treats the
/// noise as proportional to sigma1^2 (two reweighting passes).
VolDecomposition vol_decomposition(const Eigen::ArrayXd& sigma1_sq, const Eigen::ArrayXd& r1_sq,
                                   RegressionWeighting weighting = RegressionWeighting::Relative);

}  // namespace impact
