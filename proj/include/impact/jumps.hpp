#pragma once

#include "impact/calibration.hpp"
#include "impact/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace impact {

/// One-minute bin returns with strictly increasing timestamps (minutes).
struct ReturnSeries {
  Eigen::ArrayXd timestamps;
  Eigen::ArrayXd returns;

  Index size() const { return returns.size(); }
  /// Consecutive timestamps 0, 1, 2, ...
  static ReturnSeries regular(Eigen::ArrayXd returns);
};

void validate(const ReturnSeries& series);

/// Drops each return whose timestamp follows its predecessor by more than
/// `max_gap` minutes (the bin that spans a session boundary).
ReturnSeries drop_session_gaps(const ReturnSeries& series, double max_gap = 1.0);

/// Trailing mean of |r| over the `window` bins strictly before each bin.
struct LocalVol {
  Eigen::ArrayXd sigma;
  Eigen::Array<bool, Eigen::Dynamic, 1> usable;  // false for warm-up and zero-volatility bins
  Index window = 0;
};

LocalVol local_vol(const ReturnSeries& series, Index window = 120);

enum class JumpClass { Unclassified, News, NoNews };
const char* to_string(JumpClass c);

struct JumpEvent {
  Index bin = 0;
  double t = 0.0;
  double s_realized = 0.0;
  int direction = 0;
  JumpClass classification = JumpClass::Unclassified;
  std::optional<double> matched_news_time;
};

/// One event per usable bin with |r| > s * sigma (strict).
std::vector<JumpEvent> detect_jumps(const ReturnSeries& series, const LocalVol& vol, double s);

struct JumpTail {
  FitResult fit;
  /// Points (s, number of events with s_realized >= s), s descending.
  std::vector<std::pair<double, Index>> cumulative;
  Index events_above = 0;
};

inline constexpr Index kMinTailEvents = 50;

/// Hill tail index of s_realized over events above s_min (all of them enter
/// the estimator; the smallest is the threshold order statistic).
JumpTail jump_tail(const std::vector<JumpEvent>& events, double s_min);

/// Cumulative count law N(s) = N_thr * (s / s_thr)^-mu implied by a tail fit
/// (s_thr is the threshold order statistic, N_thr = k + 1). Two such laws
/// with different exponents cross at the returned s.
double tail_crossover(const FitResult& a, Index count_a, const FitResult& b, Index count_b);

struct NewsFeed {
  Eigen::ArrayXd timestamps;
  std::vector<std::string> tickers;

  Index size() const { return timestamps.size(); }
};

/// Classifies each event as News when a feed item for `ticker` lies in
/// [t - window_before, t + window_after]. Candidate pairs are taken greedily
/// by time distance (ties: earlier jump, then earlier item); each item and
/// each jump is used at most once.
std::vector<JumpEvent> match_news(std::vector<JumpEvent> events, const NewsFeed& feed, const std::string& ticker,
                                  double window_before = 2.0, double window_after = 10.0);

/// Keeps an event only when no earlier event (kept or not) lies within
/// `min_gap` bins before it, so aftershocks of a jump do not start windows
/// of their own.
std::vector<JumpEvent> decluster(const std::vector<JumpEvent>& events, Index min_gap);

struct RelaxationProfile {
  LagCurve profile;  // mean |r(t0 + tau)|, tau = 1..horizon; values[0] unused
  FitResult fit;     // excess volatility ~ amplitude * tau^exponent, exponent = -zeta
  Index events_used = 0;
};

inline constexpr Index kMinRelaxationEvents = 10;

struct RelaxationOptions {
  OffsetMode offset = OffsetMode::FitAsymptote;
  Index log_bins = 24;
};

RelaxationProfile relaxation_profile(const ReturnSeries& series, const std::vector<JumpEvent>& events,
                                     Index horizon, const RelaxationOptions& options = {});

/// Profiles per classification, for classes with enough complete windows.
std::map<JumpClass, RelaxationProfile> relaxation_by_class(const ReturnSeries& series,
                                                          const std::vector<JumpEvent>& events, Index horizon,
                                                          const RelaxationOptions& options = {});

/// Synthetic one-minute returns with planted jumps.
///
/// Background returns are Gaussian with scale base_vol * (1 + excess), where
/// the most recent jump contributes relax_amplitude * (t - t_jump)^-zeta.
/// One jump falls at a random offset in the first half of every block of
/// `spacing` bins. The jump bin's return is s times the trailing mean |r|
/// over `window` bins (the s-jump definition), with s Pareto(mu) above
/// s_floor and a random direction.
struct JumpSynthParams {
  Index n = 1'000'000;
  double base_vol = 1.0;
  Index spacing = 500;
  double mu = 4.0;
  double s_floor = 6.0;
  double relax_amplitude = 0.0;
  double zeta = 0.5;
  Index window = 120;
};

struct SyntheticJumps {
  ReturnSeries series;
  std::vector<Index> jump_bins;
  std::vector<double> planted_s;
};

SyntheticJumps synthesize_jump_returns(const JumpSynthParams& params, std::uint64_t seed);

}  // namespace impact
