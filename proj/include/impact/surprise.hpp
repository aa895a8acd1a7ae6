#pragma once

#include "impact/core.hpp"
#include "impact/orderflow.hpp"
#include "impact/propagator.hpp"

namespace impact {

/// Linear sign predictor eps_hat[t] = sum_{l=1..M} b[l-1] * eps[t-l].
struct LinearFilter {
  Eigen::ArrayXd b;

  Index order() const { return b.size(); }
  /// Bound on |eps_hat| for +/-1 inputs.
  double gain_bound() const { return b.abs().sum(); }
};

/// Least-squares predictor of order M from the empirical sign
/// autocorrelation (Yule-Walker equations, Levinson-Durbin recursion).
/// Throws NumericError when the Toeplitz system is singular or its
/// condition estimate exceeds `max_condition`.
LinearFilter fit_linear_predictor(const SignSeries& signs, Index order, double max_condition = 1e10);

/// Same fit from a given correlation curve (curve.values[0] must be 1).
LinearFilter linear_predictor_from_corr(const LagCurve& corr, Index order, double max_condition = 1e10);

/// eps_hat for every t; terms before the start of the series are zero.
Eigen::ArrayXd predict_signs(const SignSeries& signs, const LinearFilter& filter);

/// p[t] = p0 + g1 * sum_{t' < t} (eps[t'] - eps_hat[t']).
PriceSeries surprise_price(const SignSeries& signs, const LinearFilter& filter, double g1, double p0 = 0.0);

/// Kernel whose propagator price equals the surprise price:
/// G(1) = g1 and G(l+1) = G(l) - g1 * B(l) for l = 1..M; G stays at G(M+1)
/// for longer lags.
Kernel kernel_from_filter(const LinearFilter& filter, double g1);

/// Inverse of kernel_from_filter: B(l) = (G(l) - G(l+1)) / G(1).
LinearFilter filter_from_kernel(const Kernel& kernel);

/// One-step conditional impacts. Conditioning is on whether trade t+1
/// continues (same sign) or reverses trade t; both buy and sell sides are
/// pooled.
struct ConditionalImpactReport {
  double p_plus = kNaN;   // P(eps[t+1] == eps[t])
  double g_plus = kNaN;   // E[(p[t+2]-p[t+1]) eps[t+1] | same]
  double g_minus = kNaN;  // E[(p[t+2]-p[t+1]) eps[t+1] | reversed]
  double balance = kNaN;  // p_plus * g_plus - (1 - p_plus) * g_minus
  double balance_stderr = kNaN;
  Index samples_same = 0;
  Index samples_reversed = 0;
};

ConditionalImpactReport conditional_impact(const PriceSeries& price, const SignSeries& signs);

/// Reversal impact that zeroes the balance for a given continuation impact:
/// G-(1) = p_plus / (1 - p_plus) * G+(1).
double balanced_reversal_impact(double p_plus, double g_plus);

}  // namespace impact
