#include "impact/feedback.hpp"

#include "impact/calibration.hpp"
#include "impact/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace impact {

void validate(const FeedbackParams& p) {
  require(p.c > 0.0 && std::isfinite(p.c), "FeedbackParams: c must be positive");
  require(p.g_sv >= 0.0 && p.g_vs >= 0.0 && p.loop_gain >= 0.0, "FeedbackParams: gains must be nonnegative");
  require(p.noise_s >= 0.0 && p.noise_v >= 0.0, "FeedbackParams: noise scales must be nonnegative");
  require(p.s_floor > 0.0, "FeedbackParams: s_floor must be positive");
  require(p.s_ref >= p.s_floor && p.s0 >= p.s_floor, "FeedbackParams: s_ref and s0 must be at least s_floor");
  require(p.sigma0 >= 0.0, "FeedbackParams: sigma0 must be nonnegative");
  require(p.crisis_multiple > 0.0 && p.blowup > 1.0, "FeedbackParams: invalid crisis or blowup level");
}

const char* to_string(FeedbackOutcome o) { return o == FeedbackOutcome::Stable ? "stable" : "unstable"; }

double stability_threshold(const FeedbackParams& p) {
  Eigen::Matrix2d m;
  m << 1.0 - p.g_sv, p.loop_gain * p.g_sv / p.c, p.loop_gain * p.g_vs * p.c, 1.0 - p.g_vs;
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<double, double> fixed_point(const FeedbackParams& p) {
  validate(p);
  if (p.loop_gain != 1.0) return {p.s_ref, p.c * p.s_ref};
  const double total = p.g_sv + p.g_vs;
  if (total == 0.0) return {p.s0, p.sigma0};
  const double s = (p.g_vs * p.c * p.s0 + p.g_sv * p.sigma0) / (p.c * total);
  return {s, p.c * s};
}

namespace {

Eigen::Array<bool, Eigen::Dynamic, 1> flag_above(const Eigen::ArrayXd& vol, double multiple) {
  const double mean = vol.size() > 0 ? vol.mean() : 0.0;
  return vol > multiple * mean;
}

}  // namespace

CoupledSeries simulate_feedback(const FeedbackParams& p, Index n, std::uint64_t seed) {
  validate(p);
  require(n >= 2, "simulate_feedback: n must be at least 2");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double k = p.loop_gain;
  const double limit = p.blowup * std::max(p.s_ref, p.s0);
  Eigen::ArrayXd spread(n), vol(n);
  double s = p.s0, v = p.sigma0;
  Index steps = n;
  std::optional<Index> unstable_at;
  for (Index t = 0; t < n; ++t) {
    spread[t] = s;
    vol[t] = v;
    const double eta_s = p.noise_s > 0.0 ? p.noise_s * normal(rng) : 0.0;
    const double eta_v = p.noise_v > 0.0 ? p.noise_v * normal(rng) : 0.0;
    const double s_next =
        (1.0 - p.g_sv) * s + k * p.g_sv * v / p.c + (1.0 - k) * p.g_sv * p.s_ref + eta_s;
    const double v_next = (1.0 - p.g_vs) * v + k * p.g_vs * p.c * s + (1.0 - k) * p.g_vs * p.c * p.s_ref + eta_v;
    s = std::max(p.s_floor, s_next);
    v = std::max(0.0, v_next);
    const bool blown = !std::isfinite(s_next) || !std::isfinite(v_next) || s > limit || v / p.c > limit;
    // Only a repelling loop (k > 1) keeps pushing a state that reached the
    // corner back into it; otherwise the corner is a passing excursion.
    const bool collapsed = k > 1.0 && s == p.s_floor && v == 0.0;
    if (blown || collapsed) {
      unstable_at = t + 1;
      steps = t + 1;
      break;
    }
  }

  CoupledSeries out;
  out.spread = spread.head(steps);
  out.vol = vol.head(steps);
  out.outcome = unstable_at ? FeedbackOutcome::Unstable : FeedbackOutcome::Stable;
  out.unstable_at = unstable_at;
  out.crisis = flag_above(out.vol, p.crisis_multiple);
  return out;
}

CrisisStatistics crisis_statistics(const Eigen::Array<bool, Eigen::Dynamic, 1>& flags,
                                   const Eigen::ArrayXd& weights) {
  require(flags.size() == weights.size(), "crisis_statistics: flags and weights differ in length");
  CrisisStatistics st;
  Index last_start = -1;
  for (Index t = 0; t < flags.size(); ++t) {
    if (!flags[t]) continue;
    ++st.flagged_bins;
    if (t == 0 || !flags[t - 1]) {
      ++st.episodes;
      if (last_start >= 0) st.inter_crisis.push_back(t - last_start);
      last_start = t;
      st.durations.push_back(0);
      st.sizes.push_back(0.0);
    }
    ++st.durations.back();
    st.sizes.back() += weights[t];
  }
  if (st.episodes >= 21) {
    try {
      st.size_tail = hill_tail(Eigen::Map<const Eigen::ArrayXd>(st.sizes.data(), st.episodes), st.episodes - 1);
    } catch (const NumericError&) {
      st.size_tail.reset();
    }
  }
  return st;
}

CrisisStatistics crisis_statistics(const CoupledSeries& series, double multiple) {
  require(series.size() > 0, "crisis_statistics: empty series");
  require(multiple > 0.0, "crisis_statistics: multiple must be positive");
  const double mean = series.vol.mean();
  const Eigen::ArrayXd weights = mean > 0.0 ? Eigen::ArrayXd(series.vol / mean) : Eigen::ArrayXd::Zero(series.size());
  return crisis_statistics(flag_above(series.vol, multiple), weights);
}

}  // namespace impact
