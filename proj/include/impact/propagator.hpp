#pragma once

#include "impact/core.hpp"
#include "impact/orderflow.hpp"

#include <variant>

namespace impact {

/// G(l) = gamma0 / (l0^2 + l^2)^(beta/2); l0 = 0 gives gamma0 * l^-beta.
struct PowerLawKernel {
  double gamma0 = 1.0;
  double beta = 0.25;
  double l0 = 0.0;
};
/// G(l) = g0 for every lag, including lags beyond the tabulated range.
struct PermanentKernel {
  double g0 = 1.0;
};
/// G(l) = g0 * exp(-l / tau).
struct ExponentialKernel {
  double g0 = 1.0;
  double tau = 100.0;
};
/// Values supplied directly (calibrated, derived from a filter, read from file).
struct TabulatedKernel {};

using KernelFamily = std::variant<PowerLawKernel, PermanentKernel, ExponentialKernel, TabulatedKernel>;

/// Single-trade impact G(l) tabulated on lags 1..L (g[l-1] = G(l)).
///
/// Beyond L the kernel takes the constant `tail`: zero for truncated
/// families, G0 for a permanent kernel, and the last value for kernels
/// obtained from a finite prediction filter.
struct Kernel {
  Eigen::ArrayXd g;
  KernelFamily family = TabulatedKernel{};
  double tail = 0.0;

  Index truncation() const { return g.size(); }
  /// G(lag); zero for lag <= 0.
  double at(Index lag) const {
    if (lag <= 0) return 0.0;
    return lag <= g.size() ? g[lag - 1] : tail;
  }
};

Kernel make_kernel(const KernelFamily& family, Index truncation);
Kernel tabulated_kernel(Eigen::ArrayXd g, double tail = 0.0);
const char* family_name(const KernelFamily& family);

/// Kernel decay exponent that exactly offsets sign correlations decaying as
/// l^-gamma: (1 - gamma) / 2.
inline double critical_beta(double gamma) { return 0.5 * (1.0 - gamma); }

/// Mid-prices p[t] immediately preceding trade t.
struct PriceSeries {
  Eigen::ArrayXd mid;
  double p0 = 0.0;

  Index size() const { return mid.size(); }
};

/// K is the response normalisation of the linear model, E[S V^psi] for marks
/// independent of signs.
struct ModelParams {
  double K = 1.0;
  double psi = 0.0;
};

enum class ConvolutionMethod { Auto, Direct, FFT };

/// p[t] = p0 + sum_{t' < t} G(t - t') eps[t'] S[t'] V[t']^psi, with G taken
/// from `kernel.at` (so lags past the truncation contribute `tail`).
PriceSeries build_price(const SignSeries& signs, const MarkSeries& marks, const Kernel& kernel,
                        double p0 = 0.0, ConvolutionMethod method = ConvolutionMethod::Auto);
/// Unit marks.
PriceSeries build_price(const SignSeries& signs, const Kernel& kernel, double p0 = 0.0,
                        ConvolutionMethod method = ConvolutionMethod::Auto);

/// R(l) = mean over n of (p[n+l] - p[n]) * eps[n] for l = 0..max_lag.
LagCurve response(const PriceSeries& price, const SignSeries& signs, Index max_lag, int threads = 1);

/// Model response K [G(l) + sum_{0<n<l} G(l-n) C(n) + sum_{n>0} (G(l+n) - G(n)) C(n)]
/// with the last sum running to the kernel truncation (terms beyond it vanish
/// for both tail conventions). Requires max_lag <= L and `corr` covering
/// lags up to L.
LagCurve predicted_response(const Kernel& kernel, const LagCurve& corr, const ModelParams& params,
                            Index max_lag);

/// values[l] = Var(p[n+l] - p[n]) / l for l >= 1; values[0] is NaN.
LagCurve signature_plot(const PriceSeries& price, Index max_lag, int threads = 1);

}  // namespace impact
