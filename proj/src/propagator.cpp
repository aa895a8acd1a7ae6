#include "impact/propagator.hpp"

#include "impact/fft.hpp"
#include "parallel.hpp"

#include <cmath>

namespace impact {

Kernel make_kernel(const KernelFamily& family, Index truncation) {
  require(truncation >= 1, "make_kernel: truncation lag must be at least 1");
  Kernel k;
  k.family = family;
  k.g.resize(truncation);
  const Eigen::ArrayXd lags = Eigen::ArrayXd::LinSpaced(truncation, 1.0, static_cast<double>(truncation));
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLawKernel>) {
          require(f.beta > 0.0, "make_kernel: power-law beta must be positive");
          require(f.gamma0 > 0.0 && f.l0 >= 0.0, "make_kernel: power-law amplitude and l0 must be positive");
          if (f.l0 == 0.0)
            k.g = f.gamma0 * lags.pow(-f.beta);
          else
            k.g = f.gamma0 * (f.l0 * f.l0 + lags.square()).pow(-0.5 * f.beta);
        } else if constexpr (std::is_same_v<T, PermanentKernel>) {
          require(f.g0 > 0.0, "make_kernel: permanent G0 must be positive");
          k.g.setConstant(f.g0);
          k.tail = f.g0;
        } else if constexpr (std::is_same_v<T, ExponentialKernel>) {
          require(f.tau > 0.0, "make_kernel: exponential tau must be positive");
          require(f.g0 > 0.0, "make_kernel: exponential G0 must be positive");
          k.g = f.g0 * (-lags / f.tau).exp();
        } else {
          throw std::invalid_argument("make_kernel: tabulated kernels are built with tabulated_kernel");
        }
      },
      family);
  return k;
}

Kernel tabulated_kernel(Eigen::ArrayXd g, double tail) {
  require(g.size() >= 1, "tabulated_kernel: empty table");
  require(g.allFinite() && std::isfinite(tail), "tabulated_kernel: non-finite values");
  return Kernel{std::move(g), TabulatedKernel{}, tail};
}

const char* family_name(const KernelFamily& family) {
  switch (family.index()) {
    case 0: return "power_law";
    case 1: return "permanent";
    case 2: return "exponential";
    default: return "tabulated";
  }
}

PriceSeries build_price(const SignSeries& signs, const MarkSeries& marks, const Kernel& kernel, double p0,
                        ConvolutionMethod method) {
  require(signs.size() == marks.size(), "build_price: signs and marks differ in length");
  validate(marks);
  require(kernel.truncation() >= 1, "build_price: empty kernel");

  const Index n = signs.size();
  const Eigen::ArrayXd flow = signs.values() * marks.impact_weights();
  // Split G into a finite transient part (G(l) - tail on lags 1..L) and the
  // permanent remainder tail * (cumulative flow).
  const Eigen::ArrayXd transient = kernel.g - kernel.tail;
  const Index taps = std::min<Index>(kernel.truncation(), n - 1);

  if (method == ConvolutionMethod::Auto)
    method = taps <= 1024 ? ConvolutionMethod::Direct : ConvolutionMethod::FFT;

  PriceSeries price;
  price.p0 = p0;
  if (method == ConvolutionMethod::FFT) {
    price.mid = fft::causal_convolve(flow, transient);
  } else {
    price.mid = Eigen::ArrayXd::Zero(n);
    for (Index t = 1; t < n; ++t) {
      const Index m = std::min(taps, t);
      // sum_{k=1..m} transient[k-1] * flow[t-k]
      price.mid[t] = (transient.head(m) * flow.segment(t - m, m).reverse()).sum();
    }
  }
  if (kernel.tail != 0.0) {
    double cum = 0.0;
    for (Index t = 0; t < n; ++t) {
      price.mid[t] += kernel.tail * cum;
      cum += flow[t];
    }
  }
  price.mid += p0;
  return price;
}

PriceSeries build_price(const SignSeries& signs, const Kernel& kernel, double p0, ConvolutionMethod method) {
  return build_price(signs, MarkSeries::unit(signs.size()), kernel, p0, method);
}

LagCurve response(const PriceSeries& price, const SignSeries& signs, Index max_lag, int threads) {
  const Index n = price.size();
  require(n == signs.size(), "response: price and signs differ in length");
  require(max_lag >= 0 && max_lag < n, "response: max_lag leaves no overlap");

  const Eigen::ArrayXd& p = price.mid;
  const Eigen::ArrayXd& e = signs.values();
  LagCurve curve(max_lag);
  detail::parallel_for(0, max_lag + 1, threads, [&](Index l) {
    const Index m = n - l;
    const double sum = ((p.segment(l, m) - p.head(m)) * e.head(m)).sum();
    // e^2 = 1, so the squared product is the squared price change.
    const double sumsq = (p.segment(l, m) - p.head(m)).square().sum();
    const double mean = sum / static_cast<double>(m);
    curve.values[l] = mean;
    curve.counts[l] = m;
    if (m >= 2) {
      const double var = std::max(0.0, (sumsq - m * mean * mean) / (m - 1.0));
      curve.std_error[l] = std::sqrt(var / static_cast<double>(m));
    }
  });
  return curve;
}

LagCurve predicted_response(const Kernel& kernel, const LagCurve& corr, const ModelParams& params,
                            Index max_lag) {
  const Index L = kernel.truncation();
  require(params.K > 0.0, "predicted_response: K must be positive");
  require(max_lag >= 0 && max_lag <= L, "predicted_response: max_lag must not exceed the kernel truncation");
  require(corr.max_lag() >= L, "predicted_response: correlation curve shorter than the kernel truncation");

  const Eigen::ArrayXd& c = corr.values;
  LagCurve out(max_lag);
  out.values[0] = 0.0;
  for (Index l = 1; l <= max_lag; ++l) {
    double r = kernel.at(l);
    for (Index n = 1; n < l; ++n) r += kernel.at(l - n) * c[n];
    for (Index n = 1; n <= L; ++n) r += (kernel.at(l + n) - kernel.at(n)) * c[n];
    out.values[l] = params.K * r;
  }
  return out;
}

LagCurve signature_plot(const PriceSeries& price, Index max_lag, int threads) {
  const Index n = price.size();
  require(max_lag >= 1, "signature_plot: max_lag must be at least 1");
  require(n - max_lag >= 2, "signature_plot: fewer than two increments at max_lag");

  const Eigen::ArrayXd& p = price.mid;
  LagCurve curve(max_lag);
  detail::parallel_for(1, max_lag + 1, threads, [&](Index l) {
    const Index m = n - l;
    const Eigen::ArrayXd d = p.segment(l, m) - p.head(m);
    const double mean = d.mean();
    const double var = (d - mean).square().sum() / (m - 1.0);
    curve.values[l] = var / static_cast<double>(l);
    curve.counts[l] = m;
    // Gaussian approximation Var(s^2) = 2 s^4 / (m - 1), ignoring overlap.
    curve.std_error[l] = curve.values[l] * std::sqrt(2.0 / (m - 1.0));
  });
  return curve;
}

}  // namespace impact
