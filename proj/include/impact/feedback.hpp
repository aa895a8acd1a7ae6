#pragma once

#include "impact/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace impact {

/// Damped spread/volatility map
///
///   S'     = max(s_floor, (1-g_sv) S + k g_sv sigma / c + (1-k) g_sv s_ref + eta_S)
///   sigma' = max(0,       (1-g_vs) sigma + k g_vs c S + (1-k) g_vs c s_ref + eta_V)
///
/// with k = loop_gain. k = 1 is the pure coupled map, whose spectral radius
/// is exactly 1 (the soft mode: any level with sigma = c S is a fixed point).
/// k < 1 pulls towards (s_ref, c s_ref), k > 1 pushes away from it.
struct FeedbackParams {
  double c = 0.5;
  double g_sv = 0.2;
  double g_vs = 0.2;
  double loop_gain = 1.0;
  double s_ref = 10.0;
  double noise_s = 0.0;
  double noise_v = 0.0;
  double s_floor = 1.0;
  double s0 = 10.0;
  double sigma0 = 5.0;
  double crisis_multiple = 4.0;
  /// A trajectory is unstable once S or sigma / c exceeds blowup times the
  /// larger of s_ref and s0, or becomes non-finite.
  double blowup = 1e6;
};

void validate(const FeedbackParams& p);

enum class FeedbackOutcome { Stable, Unstable };
const char* to_string(FeedbackOutcome o);

struct CoupledSeries {
  Eigen::ArrayXd spread;
  Eigen::ArrayXd vol;
  Eigen::Array<bool, Eigen::Dynamic, 1> crisis;  // vol > crisis_multiple * mean(vol)
  FeedbackOutcome outcome = FeedbackOutcome::Stable;
  /// Step at which instability was detected; the series stop there.
  std::optional<Index> unstable_at;

  Index size() const { return spread.size(); }
};

/// Iterates the map for n steps. Unstable trajectories are truncated at the
/// step where they blow up or, for loop_gain > 1, collapse onto the
/// truncation corner (S = s_floor and sigma = 0 together).
CoupledSeries simulate_feedback(const FeedbackParams& params, Index n, std::uint64_t seed);

/// Spectral radius of the linear part of the map.
double stability_threshold(const FeedbackParams& params);

/// Deterministic fixed point (S*, sigma*), sigma* = c S*. For loop_gain 1
/// it is the one reached from (s0, sigma0), which conserves
/// g_vs c S + g_sv sigma.
std::pair<double, double> fixed_point(const FeedbackParams& params);

struct CrisisStatistics {
  Index episodes = 0;
  Index flagged_bins = 0;
  std::vector<Index> durations;
  std::vector<Index> inter_crisis;  // start-to-start gaps
  std::vector<double> sizes;        // sum of vol / mean(vol) over each episode
  /// Hill tail index of episode sizes; present with at least 21 episodes.
  std::optional<FitResult> size_tail;
};

/// Episodes of vol above `multiple` times the series mean.
CrisisStatistics crisis_statistics(const CoupledSeries& series, double multiple);

/// Episodes of a given flag sequence.
CrisisStatistics crisis_statistics(const Eigen::Array<bool, Eigen::Dynamic, 1>& flags,
                                   const Eigen::ArrayXd& weights);

}  // namespace impact
