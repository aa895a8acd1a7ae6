#pragma once

#include "impact/feedback.hpp"
#include "impact/jumps.hpp"
#include "impact/orderflow.hpp"
#include "impact/propagator.hpp"
#include "impact/surprise.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace impact::io {

namespace fs = std::filesystem;

/// Trades in trade time: sign, volume, spread and optionally the mid-price
/// preceding each trade.
struct TradeSeries {
  Eigen::ArrayXd signs;
  Eigen::ArrayXd volumes;
  Eigen::ArrayXd spreads;
  std::optional<Eigen::ArrayXd> mid;

  Index size() const { return signs.size(); }
  SignSeries sign_series() const { return SignSeries(signs); }
  MarkSeries marks(double psi) const { return MarkSeries{spreads, volumes, psi}; }
  std::optional<PriceSeries> price() const;
};

bool operator==(const TradeSeries& a, const TradeSeries& b);

/// Header `n,sign,volume,spread[,mid]`; `n` must count 0, 1, 2, ... Errors
/// are DataError and name the offending line.
TradeSeries read_trades_csv(const fs::path& path);
void write_trades_csv(const fs::path& path, const TradeSeries& trades);

/// Little-endian binary container: magic, format version, row count, column
/// mask, then each column as contiguous doubles.
TradeSeries read_trades_binary(const fs::path& path);
void write_trades_binary(const fs::path& path, const TradeSeries& trades);

/// Dispatches on the extension (.csv or .bin).
TradeSeries read_trades(const fs::path& path);

/// `lag,value,count,stderr` for lags lo..max_lag.
void write_lag_curve_csv(const fs::path& path, const LagCurve& curve, Index lo = 0);
LagCurve read_lag_curve_csv(const fs::path& path);

/// `lag,g` for lags 1..L; the tail is written as a final row with lag 0
/// when it is nonzero.
void write_kernel_csv(const fs::path& path, const Kernel& kernel);
Kernel read_kernel_csv(const fs::path& path);

/// `lag,b`.
void write_filter_csv(const fs::path& path, const LinearFilter& filter);

/// `timestamp,return`.
ReturnSeries read_returns_csv(const fs::path& path);
void write_returns_csv(const fs::path& path, const ReturnSeries& series);

/// `timestamp,ticker`.
NewsFeed read_news_csv(const fs::path& path);
void write_news_csv(const fs::path& path, const NewsFeed& feed);

/// `t,s_realized,direction,classification,matched_news_time` (empty field
/// when unmatched).
void write_events_csv(const fs::path& path, const std::vector<JumpEvent>& events);

/// `s,count`.
void write_cumulative_csv(const fs::path& path, const std::vector<std::pair<double, Index>>& points);

/// `t,spread,vol,crisis`.
void write_coupled_csv(const fs::path& path, const CoupledSeries& series);

/// Cross-section for the volatility regression: `asset,sigma1_sq,r1_sq`.
struct AssetTable {
  std::vector<std::string> names;
  Eigen::ArrayXd sigma1_sq;
  Eigen::ArrayXd r1_sq;
};
AssetTable read_assets_csv(const fs::path& path);
void write_assets_csv(const fs::path& path, const AssetTable& table);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);

}  // namespace impact::io
