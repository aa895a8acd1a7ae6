#include "impact/surprise.hpp"

#include <cmath>

namespace impact {

LinearFilter linear_predictor_from_corr(const LagCurve& corr, Index order, double max_condition) {
  require(order >= 1, "fit_linear_predictor: order must be at least 1");
  require(corr.max_lag() >= order, "fit_linear_predictor: correlation curve shorter than the order");
  const Eigen::ArrayXd& r = corr.values;

  // Levinson-Durbin on the Toeplitz system T b = r[1..M], T_ij = r[|i-j|].
  Eigen::ArrayXd a = Eigen::ArrayXd::Zero(order);
  Eigen::ArrayXd prev(order);
  double err = r[0];
  for (Index m = 0; m < order; ++m) {
    double acc = r[m + 1];
    for (Index j = 0; j < m; ++j) acc -= a[j] * r[m - j];
    const double k = acc / err;
    if (!std::isfinite(k) || std::abs(k) >= 1.0)
      throw NumericError("fit_linear_predictor: autocorrelation matrix is singular at order " +
                         std::to_string(m + 1));
    prev.head(m) = a.head(m);
    for (Index j = 0; j < m; ++j) a[j] = prev[j] - k * prev[m - 1 - j];
    a[m] = k;
    err *= (1.0 - k * k);
    // err is the smallest pivot of the Cholesky factorisation, so
    // r[0] / err bounds the condition number from below.
    if (err <= 0.0 || r[0] / err > max_condition)
      throw NumericError("fit_linear_predictor: autocorrelation matrix is ill-conditioned at order " +
                         std::to_string(m + 1));
  }
  return LinearFilter{a};
}

LinearFilter fit_linear_predictor(const SignSeries& signs, Index order, double max_condition) {
  require(order >= 1, "fit_linear_predictor: order must be at least 1");
  require(order * 10 < signs.size(), "fit_linear_predictor: order must be below a tenth of the series length");
  return linear_predictor_from_corr(estimate_sign_corr(signs, order), order, max_condition);
}

Eigen::ArrayXd predict_signs(const SignSeries& signs, const LinearFilter& filter) {
  const Index n = signs.size();
  const Index order = filter.order();
  const Eigen::ArrayXd& e = signs.values();
  Eigen::ArrayXd hat = Eigen::ArrayXd::Zero(n);
  for (Index t = 1; t < n; ++t) {
    const Index m = std::min(order, t);
    hat[t] = (filter.b.head(m) * e.segment(t - m, m).reverse()).sum();
  }
  return hat;
}

PriceSeries surprise_price(const SignSeries& signs, const LinearFilter& filter, double g1, double p0) {
  const Eigen::ArrayXd surprise = signs.values() - predict_signs(signs, filter);
  PriceSeries price;
  price.p0 = p0;
  price.mid.resize(signs.size());
  double cum = 0.0;
  for (Index t = 0; t < signs.size(); ++t) {
    price.mid[t] = p0 + g1 * cum;
    cum += surprise[t];
  }
  return price;
}

Kernel kernel_from_filter(const LinearFilter& filter, double g1) {
  require(g1 > 0.0, "kernel_from_filter: g1 must be positive");
  const Index order = filter.order();
  Eigen::ArrayXd g(order + 1);
  g[0] = g1;
  for (Index l = 1; l <= order; ++l) g[l] = g[l - 1] - g1 * filter.b[l - 1];
  const double tail = g[order];
  return tabulated_kernel(std::move(g), tail);
}

LinearFilter filter_from_kernel(const Kernel& kernel) {
  const Index L = kernel.truncation();
  const double g1 = kernel.at(1);
  require(g1 != 0.0, "filter_from_kernel: G(1) must be nonzero");
  // A held tail equal to G(L) adds a zero coefficient at lag L; drop it so
  // kernel_from_filter reproduces the same table length.
  const Index order = (kernel.tail == kernel.g[L - 1] && L > 1) ? L - 1 : L;
  Eigen::ArrayXd b(order);
  for (Index l = 1; l <= order; ++l) b[l - 1] = (kernel.at(l) - kernel.at(l + 1)) / g1;
  return LinearFilter{b};
}

ConditionalImpactReport conditional_impact(const PriceSeries& price, const SignSeries& signs) {
  const Index n = signs.size();
  require(price.size() == n, "conditional_impact: price and signs differ in length");
  require(n >= 100, "conditional_impact: at least 100 trades required");

  const Eigen::ArrayXd& p = price.mid;
  const Eigen::ArrayXd& e = signs.values();
  double sum_same = 0.0, sum_rev = 0.0, sum_bal = 0.0, sumsq_bal = 0.0;
  Index n_same = 0, n_rev = 0;
  const Index samples = n - 2;
  for (Index t = 0; t < samples; ++t) {
    const double r = p[t + 2] - p[t + 1];
    const double signed_move = r * e[t + 1];
    if (e[t + 1] == e[t]) {
      sum_same += signed_move;
      ++n_same;
    } else {
      sum_rev += signed_move;
      ++n_rev;
    }
    // p+ G+ - (1-p+) G- is the mean of r * eps[t].
    const double b = r * e[t];
    sum_bal += b;
    sumsq_bal += b * b;
  }
  if (n_same < 2 || n_rev < 2)
    throw DataError("conditional_impact: too few samples in a conditional branch");

  ConditionalImpactReport rep;
  rep.samples_same = n_same;
  rep.samples_reversed = n_rev;
  rep.p_plus = static_cast<double>(n_same) / samples;
  rep.g_plus = sum_same / n_same;
  rep.g_minus = sum_rev / n_rev;
  rep.balance = rep.p_plus * rep.g_plus - (1.0 - rep.p_plus) * rep.g_minus;
  const double mean = sum_bal / samples;
  const double var = std::max(0.0, (sumsq_bal - samples * mean * mean) / (samples - 1.0));
  rep.balance_stderr = std::sqrt(var / samples);
  return rep;
}

double balanced_reversal_impact(double p_plus, double g_plus) {
  require(p_plus >= 0.0 && p_plus < 1.0, "balanced_reversal_impact: p_plus must lie in [0, 1)");
  return p_plus / (1.0 - p_plus) * g_plus;
}

}  // namespace impact
