#pragma once

#include "impact/feedback.hpp"
#include "impact/jumps.hpp"
#include "impact/orderflow.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace impact::cli {

using Json = nlohmann::ordered_json;

/// Schema violation or unusable option value (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OrderflowConfig {
  Index n = 100'000;
  std::string sign_model = "long_memory";  // long_memory | markov | iid
  double gamma = 0.5;
  double c0 = 0.3;
  double p_repeat = 0.5;
  MarkLaw spread_law = ConstantLaw{1.0};
  MarkLaw volume_law = ConstantLaw{1.0};
  double psi = 0.0;
  Index corr_lags = 1000;
};

struct PropagatorConfig {
  std::string family = "power_law";  // power_law | permanent | exponential | file
  double gamma0 = 1.0;
  double beta = 0.25;
  double l0 = 0.0;
  double g0 = 1.0;
  double tau = 100.0;
  /// Number of tabulated lags; 0 means one per trade (no truncation).
  Index truncation = 1000;
  std::string method = "auto";  // auto | direct | fft
  double p0 = 0.0;
  Index response_lags = 1000;
  Index signature_lags = 1000;
  Index fit_lo = 10;
  Index fit_hi = 1000;
};

struct SurpriseConfig {
  Index order = 256;
  double g1 = 1.0;
  double max_condition = 1e10;
};

struct CalibrationConfig {
  Index truncation = 200;
  /// Negative selects the ridge by the discrepancy principle.
  double ridge = -1.0;
  /// Relative noise level assumed for the discrepancy principle.
  double noise = 0.01;
  int difference_order = 1;
};

struct VolatilityConfig {
  Index assets = 200;
  double A = 10.0;
  double J2 = 0.05;
  double r1_max = 0.4;
  double noise = 0.05;
  std::string weighting = "relative";  // relative | ordinary
};

struct JumpsConfig {
  JumpSynthParams synth;
  double s = 4.0;
  double s_min = 6.0;
  Index horizon = 250;
  std::string ticker = "SYN";
  double news_before = 2.0;
  double news_after = 10.0;
  /// Synthetic feed: share of planted jumps carrying a news item, plus
  /// unrelated items per 10^4 bins.
  double news_share = 0.5;
  double news_noise_rate = 2.0;
};

struct FeedbackConfig {
  FeedbackParams params;
  Index n = 100'000;
  /// Loop gains for the sweep; empty disables it.
  std::vector<double> sweep_loop_gains;
  Index sweep_seeds = 10;
};

struct IoConfig {
  std::string trades;
  std::string kernel;
  std::string returns;
  std::string news;
  std::string assets;
  std::vector<std::string> manifests;
};

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  OrderflowConfig orderflow;
  PropagatorConfig propagator;
  SurpriseConfig surprise;
  CalibrationConfig calibration;
  VolatilityConfig volatility;
  JumpsConfig jumps;
  FeedbackConfig feedback;
  IoConfig io;
};

const std::vector<std::string>& experiment_names();

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the offending key path.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Every field, including defaults; parse_config(to_json(c)) == c.
Json to_json(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace impact::cli
