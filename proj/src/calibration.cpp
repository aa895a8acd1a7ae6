#include "impact/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace impact {

Eigen::MatrixXd response_operator(const LagCurve& corr, Index truncation) {
  require(truncation >= 1, "response_operator: truncation must be at least 1");
  require(corr.max_lag() >= truncation, "response_operator: correlation curve shorter than the truncation");
  const Eigen::ArrayXd& c = corr.values;
  Eigen::MatrixXd a(truncation, truncation);
  for (Index j = 1; j <= truncation; ++j) {
    for (Index l = 1; l <= truncation; ++l) {
      const double toeplitz = l == j ? 1.0 : c[std::abs(l - j)];
      a(l - 1, j - 1) = toeplitz - c[j];
    }
  }
  return a;
}

namespace {

Eigen::MatrixXd difference_operator(Index n, int order) {
  require(order == 1 || order == 2, "calibrate_kernel: difference order must be 1 or 2");
  const Index rows = std::max<Index>(n - order, 0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, n);
  for (Index i = 0; i < rows; ++i) {
    if (order == 1) {
      d(i, i) = -1.0;
      d(i, i + 1) = 1.0;
    } else {
      d(i, i) = 1.0;
      d(i, i + 1) = -2.0;
      d(i, i + 2) = 1.0;
    }
  }
  return d;
}

struct RidgeProblem {
  Eigen::MatrixXd op;  // K * A
  Eigen::VectorXd rhs;
  Eigen::MatrixXd diff;

  Eigen::VectorXd solve(double ridge) const {
    const Index n = op.cols();
    Eigen::MatrixXd stacked(op.rows() + diff.rows(), n);
    stacked << op, std::sqrt(ridge) * diff;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(stacked.rows());
    b.head(rhs.size()) = rhs;
    return stacked.colPivHouseholderQr().solve(b);
  }
  double residual(const Eigen::VectorXd& g) const { return (rhs - op * g).norm(); }
};

RidgeProblem make_problem(const LagCurve& response_emp, const LagCurve& corr_emp, double K, Index truncation,
                          int difference_order) {
  require(K > 0.0, "calibrate_kernel: K must be positive");
  require(response_emp.max_lag() >= truncation, "calibrate_kernel: response curve shorter than the truncation");
  RidgeProblem p;
  p.op = K * response_operator(corr_emp, truncation);
  p.rhs = response_emp.values.segment(1, truncation).matrix();
  require(p.rhs.allFinite(), "calibrate_kernel: response curve has non-finite values");
  p.diff = difference_operator(truncation, difference_order);
  return p;
}

}  // namespace

KernelCalibration calibrate_kernel(const LagCurve& response_emp, const LagCurve& corr_emp, double K,
                                   Index truncation, double ridge, int difference_order) {
  require(ridge >= 0.0, "calibrate_kernel: ridge must be nonnegative");
  const RidgeProblem p = make_problem(response_emp, corr_emp, K, truncation, difference_order);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(p.op, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = s[0] * static_cast<double>(truncation) * std::numeric_limits<double>::epsilon();

  KernelCalibration out;
  out.rank = (s.array() > tol).count();
  out.condition_number = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();

  Eigen::VectorXd g;
  if (ridge == 0.0) {
    if (out.rank < truncation)
      throw NumericError("calibrate_kernel: response operator is rank deficient (rank " + std::to_string(out.rank) +
                         " of " + std::to_string(truncation) + ", condition " +
                         std::to_string(out.condition_number) + "); supply a ridge weight");
    g = svd.solve(p.rhs);
  } else {
    g = p.solve(ridge);
  }
  out.residual_norm = p.residual(g);
  out.kernel = tabulated_kernel(g.array(), 0.0);
  return out;
}

double select_ridge_discrepancy(const LagCurve& response_emp, const LagCurve& corr_emp, double K,
                                Index truncation, double noise_norm, int difference_order, double lo, double hi) {
  require(noise_norm > 0.0, "select_ridge_discrepancy: noise norm must be positive");
  require(lo > 0.0 && hi > lo, "select_ridge_discrepancy: invalid search interval");
  const RidgeProblem p = make_problem(response_emp, corr_emp, K, truncation, difference_order);
  auto excess = [&](double log_ridge) { return p.residual(p.solve(std::exp(log_ridge))) - noise_norm; };

  double a = std::log(lo), b = std::log(hi);
  if (excess(a) >= 0.0) return lo;
  if (excess(b) <= 0.0) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (a + b);
    (excess(mid) < 0.0 ? a : b) = mid;
  }
  return std::exp(0.5 * (a + b));
}

// ------------------------------------------------------------- power laws

namespace {

struct Points {
  Eigen::ArrayXd x, y, se;
};

Points collect(const LagCurve& curve, Index lo, Index hi, Index bins) {
  Points pts;
  if (bins <= 0) {
    const Index m = hi - lo + 1;
    pts.x = Eigen::ArrayXd::LinSpaced(m, static_cast<double>(lo), static_cast<double>(hi));
    pts.y = curve.values.segment(lo, m);
    pts.se = curve.std_error.segment(lo, m);
    return pts;
  }
  std::vector<Index> edges;
  const double ratio = static_cast<double>(hi + 1) / static_cast<double>(lo);
  for (Index i = 0; i <= bins; ++i) {
    const auto e = static_cast<Index>(std::llround(lo * std::pow(ratio, static_cast<double>(i) / bins)));
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  edges.back() = hi + 1;
  const Index m = static_cast<Index>(edges.size()) - 1;
  pts.x.resize(m);
  pts.y.resize(m);
  pts.se.resize(m);
  for (Index b = 0; b < m; ++b) {
    const Index start = edges[b], len = edges[b + 1] - edges[b];
    const Eigen::ArrayXd lags = Eigen::ArrayXd::LinSpaced(len, static_cast<double>(start),
                                                          static_cast<double>(start + len - 1));
    pts.x[b] = std::exp(lags.log().mean());
    pts.y[b] = curve.values.segment(start, len).mean();
    pts.se[b] = std::sqrt(curve.std_error.segment(start, len).square().mean() / static_cast<double>(len));
  }
  return pts;
}

struct LineFit {
  double intercept = kNaN, slope = kNaN, slope_se = kNaN, rms = kNaN;
};

// Weighted regression of log(y - offset) on log(x).
LineFit loglog_fit(const Points& pts, double offset, FitWeighting weighting) {
  const Eigen::ArrayXd excess = pts.y - offset;
  const Eigen::ArrayXd lx = pts.x.log();
  const Eigen::ArrayXd ly = excess.log();
  Eigen::ArrayXd w;
  switch (weighting) {
    case FitWeighting::None: w = Eigen::ArrayXd::Ones(pts.x.size()); break;
    case FitWeighting::RelativeValue: w = excess.square(); break;
    case FitWeighting::InverseVariance: w = (excess / pts.se).square(); break;
  }
  const double sw = w.sum();
  const double mx = (w * lx).sum() / sw, my = (w * ly).sum() / sw;
  const double sxx = (w * (lx - mx).square()).sum();
  const double sxy = (w * (lx - mx) * (ly - my)).sum();
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const Eigen::ArrayXd r = ly - f.intercept - f.slope * lx;
  const double wrss = (w * r.square()).sum();
  f.rms = std::sqrt(wrss / sw);
  const Index m = pts.x.size();
  f.slope_se = std::sqrt(wrss / static_cast<double>(m - 2) / sxx);
  return f;
}

}  // namespace

FitResult fit_powerlaw(const LagCurve& curve, Index lo, Index hi, const PowerLawFitOptions& options) {
  require(lo >= 1 && lo < hi && hi <= curve.max_lag(), "fit_powerlaw: lag range outside the curve");
  const Points pts = collect(curve, lo, hi, options.log_bins);
  require(pts.x.size() >= 4, "fit_powerlaw: fewer than 4 points in range");
  require(pts.y.allFinite(), "fit_powerlaw: non-finite values in range");
  if (options.weighting == FitWeighting::InverseVariance)
    require(pts.se.allFinite() && (pts.se > 0.0).all(), "fit_powerlaw: inverse-variance weights need standard errors");

  double offset = 0.0;
  if (options.offset == OffsetMode::FitAsymptote) {
    const double ymin = pts.y.minCoeff();
    const double span = pts.y.maxCoeff() - ymin;
    require(span > 0.0, "fit_powerlaw: constant curve has no power-law component");
    // Search the gap d = ymin - asymptote on a log grid, then refine by
    // golden section around the best grid point. Candidates are compared by
    // their misfit in y (scaled by se under inverse-variance weighting): a
    // pure log residual shrinks as the asymptote runs off to -infinity.
    const Eigen::ArrayXd v = options.weighting == FitWeighting::InverseVariance ? Eigen::ArrayXd(pts.se.square().inverse())
                                                                                 : Eigen::ArrayXd::Ones(pts.y.size());
    auto cost = [&](double log_gap) {
      const double off = ymin - std::exp(log_gap);
      const LineFit l = loglog_fit(pts, off, options.weighting);
      const Eigen::ArrayXd model = off + std::exp(l.intercept) * pts.x.pow(l.slope);
      return (v * (pts.y - model).square()).sum();
    };
    const double g_lo = std::log(1e-9 * span), g_hi = std::log(4.0 * span);
    constexpr int kGrid = 400;
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
      const double c = cost(g_lo + (g_hi - g_lo) * i / kGrid);
      if (c < best_cost) best_cost = c, best = i;
    }
    const double step = (g_hi - g_lo) / kGrid;
    double a = g_lo + step * std::max(best - 1, 0), b = g_lo + step * std::min(best + 1, kGrid);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
      if (f1 < f2) {
        b = x2, x2 = x1, f2 = f1;
        x1 = b - phi * (b - a), f1 = cost(x1);
      } else {
        a = x1, x1 = x2, f1 = f2;
        x2 = a + phi * (b - a), f2 = cost(x2);
      }
    }
    offset = ymin - std::exp(0.5 * (a + b));
  } else {
    require((pts.y > 0.0).all(), "fit_powerlaw: nonpositive values in range");
  }

  const LineFit line = loglog_fit(pts, offset, options.weighting);
  FitResult fit;
  fit.amplitude = std::exp(line.intercept);
  fit.exponent = line.slope;
  fit.stderr_exponent = line.slope_se;
  fit.range_lo = static_cast<double>(lo);
  fit.range_hi = static_cast<double>(hi);
  fit.residual = line.rms;
  fit.asymptote = offset;
  fit.points = pts.x.size();
  return fit;
}

// ------------------------------------------------------------------ tails

namespace {

// Positive samples, k + 1 largest sorted in descending order.
std::vector<double> top_order_statistics(const Eigen::ArrayXd& samples, Index k) {
  std::vector<double> pos;
  pos.reserve(static_cast<std::size_t>(samples.size()));
  for (Index i = 0; i < samples.size(); ++i)
    if (samples[i] > 0.0) pos.push_back(samples[i]);
  require(k < static_cast<Index>(pos.size()), "hill_tail: k must be below the number of positive samples");
  std::partial_sort(pos.begin(), pos.begin() + k + 1, pos.end(), std::greater<>());
  pos.resize(static_cast<std::size_t>(k + 1));
  return pos;
}

}  // namespace

FitResult hill_tail(const Eigen::ArrayXd& samples, Index k) {
  require(k >= 20, "hill_tail: k must be at least 20");
  const std::vector<double> top = top_order_statistics(samples, k);
  const double threshold = top[static_cast<std::size_t>(k)];
  if (!(top.front() > threshold)) throw NumericError("hill_tail: tied order statistics, tail index undefined");

  std::vector<double> log_ratio(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (Index i = 0; i < k; ++i) {
    log_ratio[static_cast<std::size_t>(i)] = std::log(top[static_cast<std::size_t>(i)] / threshold);
    sum += log_ratio[static_cast<std::size_t>(i)];
  }
  const double mu = static_cast<double>(k) / sum;

  double rss = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double empirical = std::log(static_cast<double>(i + 1) / static_cast<double>(k + 1));
    const double r = empirical + mu * log_ratio[static_cast<std::size_t>(i)];
    rss += r * r;
  }

  FitResult fit;
  fit.amplitude = threshold;
  fit.exponent = mu;
  fit.stderr_exponent = mu / std::sqrt(static_cast<double>(k));
  fit.range_lo = 1.0;
  fit.range_hi = static_cast<double>(k);
  fit.residual = std::sqrt(rss / static_cast<double>(k));
  fit.points = k;
  return fit;
}

std::vector<std::pair<Index, double>> hill_plot(const Eigen::ArrayXd& samples, const std::vector<Index>& ks) {
  std::vector<std::pair<Index, double>> out;
  out.reserve(ks.size());
  for (Index k : ks) out.emplace_back(k, hill_tail(samples, k).exponent);
  return out;
}

// ------------------------------------------------------ volatility split

namespace {

struct Line {
  double slope = 0.0, intercept = 0.0;
};

Line weighted_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const Eigen::ArrayXd& w) {
  const double sw = w.sum();
  const double mx = (w * x).sum() / sw, my = (w * y).sum() / sw;
  const double sxx = (w * (x - mx).square()).sum();
  Line l;
  l.slope = (w * (x - mx) * (y - my)).sum() / sxx;
  l.intercept = my - l.slope * mx;
  return l;
}

}  // namespace

VolDecomposition vol_decomposition(const Eigen::ArrayXd& sigma1_sq, const Eigen::ArrayXd& r1_sq,
                                   RegressionWeighting weighting) {
  require(sigma1_sq.size() == r1_sq.size(), "vol_decomposition: inputs differ in length");
  require(sigma1_sq.size() >= 10, "vol_decomposition: at least 10 observations required");
  require((sigma1_sq >= 0.0).all() && (r1_sq >= 0.0).all(), "vol_decomposition: inputs must be nonnegative");
  const double spread = r1_sq.maxCoeff() - r1_sq.minCoeff();
  require(spread > 1e-12 * std::max(1.0, r1_sq.abs().maxCoeff()), "vol_decomposition: constant regressor");

  const Eigen::ArrayXd& x = r1_sq;
  const Eigen::ArrayXd& y = sigma1_sq;
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(x.size());
  Line fit = weighted_line(x, y, w);
  bool clamped = false;

  auto clamp_through_origin = [&] {
    if (fit.intercept < 0.0) {
      fit.slope = (w * x * y).sum() / (w * x.square()).sum();
      fit.intercept = 0.0;
      clamped = true;
    } else {
      clamped = false;
    }
  };
  clamp_through_origin();

  if (weighting == RegressionWeighting::Relative) {
    const double floor = 1e-12 * std::max(y.mean(), 1e-300);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::ArrayXd fitted = (fit.intercept + fit.slope * x).max(floor);
      w = fitted.square().inverse();
      fit = weighted_line(x, y, w);
      clamp_through_origin();
    }
  }

  VolDecomposition out;
  out.A = fit.slope;
  out.J2 = fit.intercept;
  out.intercept_clamped = clamped;
  const Eigen::ArrayXd resid = y - fit.intercept - fit.slope * x;
  const double ss_tot = (y - y.mean()).square().sum();
  out.r2 = ss_tot > 0.0 ? 1.0 - resid.square().sum() / ss_tot : kNaN;
  out.jump_share = out.J2 / y.mean();
  out.impact_dominated = out.jump_share < kImpactDominatedShare;
  return out;
}

}  // namespace impact
