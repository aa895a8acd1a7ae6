#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace impact {

using Index = Eigen::Index;
using CountArray = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Precondition violations throw std::invalid_argument. The two classes below
// cover failures that are not the caller's fault in the same sense.

/// Malformed or inconsistent input data (files, series contents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not produce a trustworthy result (singular system,
/// overflow, failed embedding).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

/// A function of integer lag 0..max_lag with per-lag sample counts and
/// standard errors. Standard errors are NaN where fewer than two samples exist.
struct LagCurve {
  Eigen::ArrayXd values;
  CountArray counts;
  Eigen::ArrayXd std_error;

  LagCurve() = default;
  explicit LagCurve(Index max_lag)
      : values(Eigen::ArrayXd::Constant(max_lag + 1, kNaN)),
        counts(CountArray::Zero(max_lag + 1)),
        std_error(Eigen::ArrayXd::Constant(max_lag + 1, kNaN)) {}

  Index max_lag() const { return values.size() - 1; }
  Index size() const { return values.size(); }
};

/// Amplitude/exponent pair from a power-law or tail fit.
///
/// For lag-curve fits the model is y = asymptote + amplitude * x^exponent
/// (asymptote is zero unless it was fitted). For tail fits the exponent is the
/// positive tail index and amplitude is the threshold order statistic.
struct FitResult {
  double amplitude = kNaN;
  double exponent = kNaN;
  double stderr_exponent = kNaN;
  double range_lo = kNaN;
  double range_hi = kNaN;
  double residual = kNaN;
  double asymptote = 0.0;
  Index points = 0;
};

}  // namespace impact
