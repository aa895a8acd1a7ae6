#include "impact/jumps.hpp"

#include "impact/random.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace impact {

ReturnSeries ReturnSeries::regular(Eigen::ArrayXd returns) {
  const Index n = returns.size();
  return {Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)), std::move(returns)};
}

void validate(const ReturnSeries& series) {
  require(series.timestamps.size() == series.returns.size(), "ReturnSeries: timestamps and returns differ in length");
  require(series.returns.allFinite(), "ReturnSeries: non-finite returns");
  for (Index i = 1; i < series.size(); ++i)
    require(series.timestamps[i] > series.timestamps[i - 1], "ReturnSeries: timestamps must be strictly increasing");
}

ReturnSeries drop_session_gaps(const ReturnSeries& series, double max_gap) {
  validate(series);
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(series.size()));
  for (Index i = 0; i < series.size(); ++i)
    if (i == 0 || series.timestamps[i] - series.timestamps[i - 1] <= max_gap) keep.push_back(i);
  ReturnSeries out;
  out.timestamps.resize(static_cast<Index>(keep.size()));
  out.returns.resize(static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.timestamps[static_cast<Index>(j)] = series.timestamps[keep[j]];
    out.returns[static_cast<Index>(j)] = series.returns[keep[j]];
  }
  return out;
}

LocalVol local_vol(const ReturnSeries& series, Index window) {
  require(window >= 2, "local_vol: window must be at least 2");
  require(series.size() > window, "local_vol: series not longer than the window");
  const Index n = series.size();
  const Eigen::ArrayXd a = series.returns.abs();
  LocalVol vol;
  vol.window = window;
  vol.sigma = Eigen::ArrayXd::Zero(n);
  vol.usable = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
  for (Index t = window; t < n; ++t) {
    vol.sigma[t] = a.segment(t - window, window).sum() / static_cast<double>(window);
    vol.usable[t] = vol.sigma[t] > 0.0;
  }
  return vol;
}

const char* to_string(JumpClass c) {
  switch (c) {
    case JumpClass::News: return "news";
    case JumpClass::NoNews: return "no_news";
    default: return "unclassified";
  }
}

std::vector<JumpEvent> detect_jumps(const ReturnSeries& series, const LocalVol& vol, double s) {
  require(s > 1.0, "detect_jumps: threshold must exceed 1");
  require(vol.sigma.size() == series.size(), "detect_jumps: volatility computed on a different series");
  std::vector<JumpEvent> events;
  for (Index t = 0; t < series.size(); ++t) {
    if (!vol.usable[t]) continue;
    const double r = series.returns[t];
    if (std::abs(r) > s * vol.sigma[t]) {
      JumpEvent e;
      e.bin = t;
      e.t = series.timestamps[t];
      e.s_realized = std::abs(r) / vol.sigma[t];
      e.direction = r > 0.0 ? 1 : -1;
      events.push_back(e);
    }
  }
  return events;
}

JumpTail jump_tail(const std::vector<JumpEvent>& events, double s_min) {
  std::vector<double> above;
  for (const auto& e : events)
    if (e.s_realized > s_min) above.push_back(e.s_realized);
  if (static_cast<Index>(above.size()) < kMinTailEvents)
    throw DataError("jump_tail: " + std::to_string(above.size()) + " events above s_min, need " +
                    std::to_string(kMinTailEvents));

  JumpTail out;
  out.events_above = static_cast<Index>(above.size());
  out.fit = hill_tail(Eigen::Map<const Eigen::ArrayXd>(above.data(), out.events_above), out.events_above - 1);

  std::vector<double> all;
  all.reserve(events.size());
  for (const auto& e : events) all.push_back(e.s_realized);
  std::sort(all.begin(), all.end(), std::greater<>());
  out.cumulative.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) out.cumulative.emplace_back(all[i], static_cast<Index>(i + 1));
  return out;
}

double tail_crossover(const FitResult& a, Index count_a, const FitResult& b, Index count_b) {
  require(a.exponent != b.exponent, "tail_crossover: equal exponents never cross");
  // log N(s) = log N_thr + mu log s_thr - mu log s
  const double la = std::log(static_cast<double>(count_a)) + a.exponent * std::log(a.amplitude);
  const double lb = std::log(static_cast<double>(count_b)) + b.exponent * std::log(b.amplitude);
  return std::exp((la - lb) / (a.exponent - b.exponent));
}

std::vector<JumpEvent> match_news(std::vector<JumpEvent> events, const NewsFeed& feed, const std::string& ticker,
                                  double window_before, double window_after) {
  require(window_before >= 0.0 && window_after >= 0.0, "match_news: windows must be nonnegative");
  require(static_cast<Index>(feed.tickers.size()) == feed.size(), "match_news: feed timestamps and tickers differ");

  struct Candidate {
    double distance;
    double event_t;
    double item_t;
    std::size_t event;
    Index item;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t = events[i].t;
    for (Index j = 0; j < feed.size(); ++j) {
      if (feed.tickers[static_cast<std::size_t>(j)] != ticker) continue;
      const double u = feed.timestamps[j];
      if (u >= t - window_before && u <= t + window_after)
        candidates.push_back({std::abs(u - t), t, u, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.distance, x.event_t, x.item_t, x.event, x.item) <
           std::tie(y.distance, y.event_t, y.item_t, y.event, y.item);
  });

  std::vector<bool> item_used(static_cast<std::size_t>(feed.size()), false);
  for (auto& e : events) {
    e.classification = JumpClass::NoNews;
    e.matched_news_time.reset();
  }
  std::vector<bool> event_used(events.size(), false);
  for (const auto& c : candidates) {
    if (event_used[c.event] || item_used[static_cast<std::size_t>(c.item)]) continue;
    event_used[c.event] = true;
    item_used[static_cast<std::size_t>(c.item)] = true;
    events[c.event].classification = JumpClass::News;
    events[c.event].matched_news_time = c.item_t;
  }
  return events;
}

std::vector<JumpEvent> decluster(const std::vector<JumpEvent>& events, Index min_gap) {
  require(min_gap >= 0, "decluster: min_gap must be nonnegative");
  std::vector<JumpEvent> out;
  Index last = -1;
  for (const auto& e : events) {
    require(last < 0 || e.bin > last, "decluster: events must be in increasing bin order");
    if (last < 0 || e.bin - last > min_gap) out.push_back(e);
    last = e.bin;
  }
  return out;
}

RelaxationProfile relaxation_profile(const ReturnSeries& series, const std::vector<JumpEvent>& events,
                                     Index horizon, const RelaxationOptions& options) {
  require(horizon >= 4, "relaxation_profile: horizon must be at least 4");
  const Index n = series.size();
  std::vector<Index> starts;
  for (const auto& e : events)
    if (e.bin + horizon < n) starts.push_back(e.bin);
  if (static_cast<Index>(starts.size()) < kMinRelaxationEvents)
    throw DataError("relaxation_profile: " + std::to_string(starts.size()) + " complete windows, need " +
                    std::to_string(kMinRelaxationEvents));

  const Eigen::ArrayXd a = series.returns.abs();
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(horizon + 1), sumsq = Eigen::ArrayXd::Zero(horizon + 1);
  for (Index t0 : starts) {
    const Eigen::ArrayXd w = a.segment(t0 + 1, horizon);
    sum.tail(horizon) += w;
    sumsq.tail(horizon) += w.square();
  }
  const auto m = static_cast<double>(starts.size());
  RelaxationProfile out;
  out.events_used = static_cast<Index>(starts.size());
  out.profile = LagCurve(horizon);
  for (Index tau = 1; tau <= horizon; ++tau) {
    const double mean = sum[tau] / m;
    out.profile.values[tau] = mean;
    out.profile.counts[tau] = out.events_used;
    const double var = std::max(0.0, (sumsq[tau] - m * mean * mean) / (m - 1.0));
    out.profile.std_error[tau] = std::sqrt(var / m);
  }
  PowerLawFitOptions fit_opts;
  fit_opts.offset = options.offset;
  fit_opts.log_bins = options.log_bins;
  fit_opts.weighting = FitWeighting::InverseVariance;
  out.fit = fit_powerlaw(out.profile, 1, horizon, fit_opts);
  return out;
}

std::map<JumpClass, RelaxationProfile> relaxation_by_class(const ReturnSeries& series,
                                                          const std::vector<JumpEvent>& events, Index horizon,
                                                          const RelaxationOptions& options) {
  std::map<JumpClass, std::vector<JumpEvent>> groups;
  for (const auto& e : events) groups[e.classification].push_back(e);
  std::map<JumpClass, RelaxationProfile> out;
  for (const auto& [cls, group] : groups) {
    Index complete = 0;
    for (const auto& e : group)
      if (e.bin + horizon < series.size()) ++complete;
    if (complete >= kMinRelaxationEvents) out.emplace(cls, relaxation_profile(series, group, horizon, options));
  }
  return out;
}

SyntheticJumps synthesize_jump_returns(const JumpSynthParams& p, std::uint64_t seed) {
  require(p.n > p.window && p.window >= 2, "synthesize_jump_returns: n must exceed the window");
  require(p.spacing >= 4 && p.base_vol > 0.0 && p.mu > 0.0 && p.s_floor > 1.0,
          "synthesize_jump_returns: invalid parameters");
  require(p.relax_amplitude >= 0.0 && p.zeta > 0.0, "synthesize_jump_returns: invalid relaxation parameters");

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<Index> offset(0, p.spacing / 2 - 1);

  SyntheticJumps out;
  Eigen::ArrayXd r(p.n);
  Index next_jump = -1;
  Index block = 0;
  Index last_jump = -1;
  double trailing = 0.0;  // sum of |r| over the last `window` bins
  for (Index t = 0; t < p.n; ++t) {
    if (t == block * p.spacing) {
      next_jump = t + offset(rng);
      ++block;
    }
    if (t == next_jump && t >= p.window) {
      const double s = p.s_floor * std::pow(1.0 - uniform(rng), -1.0 / p.mu);
      const double dir = uniform(rng) < 0.5 ? -1.0 : 1.0;
      r[t] = dir * s * trailing / static_cast<double>(p.window);
      out.jump_bins.push_back(t);
      out.planted_s.push_back(s);
      last_jump = t;
    } else {
      double scale = p.base_vol;
      if (last_jump >= 0 && p.relax_amplitude > 0.0)
        scale *= 1.0 + p.relax_amplitude * std::pow(static_cast<double>(t - last_jump), -p.zeta);
      r[t] = scale * normal(rng);
    }
    trailing += std::abs(r[t]);
    if (t >= p.window) trailing -= std::abs(r[t - p.window]);
  }
  out.series = ReturnSeries::regular(std::move(r));
  return out;
}

}  // namespace impact
