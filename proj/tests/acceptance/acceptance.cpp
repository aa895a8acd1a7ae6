// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "impact/calibration.hpp"
#include "impact/feedback.hpp"
#include "impact/jumps.hpp"
#include "impact/orderflow.hpp"
#include "impact/propagator.hpp"
#include "impact/random.hpp"
#include "impact/surprise.hpp"

#ifdef IMPACT_ACCEPTANCE_CLI
#include "impact/cli/experiments.hpp"
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace impact;

namespace {

// ------------------------------------------------------------ tolerances
constexpr double kAc1Tol = 0.08;
constexpr double kAc1Seconds = 30.0;
constexpr double kAc2Super = 0.3;
constexpr double kAc2Flat = 0.05;
constexpr double kAc2Sub = -0.1;
constexpr double kAc2Seconds = 120.0;
constexpr double kAc3Sigmas = 3.0;
constexpr double kAc4Target = 0.5;
constexpr double kAc4Tol = 0.1;
constexpr double kAc5PerStep = 1e-10;
constexpr double kAc6Sigmas = 3.0;
constexpr double kAc7Exact = 1e-6;
constexpr double kAc7Noisy = 0.05;
constexpr double kAc7Seconds = 10.0;
constexpr double kAc8TolMu27 = 0.4;
constexpr double kAc8TolMu40 = 0.3;
constexpr double kAc8TolZeta05 = 0.1;
constexpr double kAc8TolZeta10 = 0.15;
constexpr double kAc9TolA = 0.10;
constexpr double kAc9TolJ2 = 0.20;
constexpr double kAc10FixedPoint = 1e-8;
constexpr double kAc10Stable = 0.01;
constexpr double kAc10Unstable = 0.99;
constexpr double kAc10Ratio = 0.02;

constexpr std::uint64_t kSeed = 20240611;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [x]");
  }
};

std::uint64_t seed_for(const std::string& stage) { return substream_seed(kSeed, stage); }

// ------------------------------------------------------------------ AC1
Outcome ac1() {
  Outcome o;
  for (double gamma : {0.3, 0.5, 0.8}) {
    const auto t0 = std::chrono::steady_clock::now();
    const SignSeries signs = gen_signs(1'000'000, gamma, 0.3, seed_for(fmt("ac1/%g", gamma)));
    const LagCurve c = estimate_sign_corr(signs, 1000);
    const FitResult fit = fit_powerlaw(c, 10, 1000, {OffsetMode::None, 15, FitWeighting::RelativeValue});
    const double secs = seconds_since(t0);
    o.check(std::abs(-fit.exponent - gamma) <= kAc1Tol && secs < kAc1Seconds,
            fmt("gamma %.1f: fitted %.3f in %.1fs", gamma, -fit.exponent, secs));
  }
  return o;
}

// ------------------------------------------------------------------ AC2
double signature_slope(const SignSeries& signs, double beta) {
  const Kernel k = make_kernel(PowerLawKernel{1.0, beta, 0.0}, signs.size());
  const PriceSeries p = build_price(signs, k, 0.0, ConvolutionMethod::FFT);
  const LagCurve d = signature_plot(p, 1000);
  return fit_powerlaw(d, 10, 1000).exponent;
}

Outcome ac2() {
  Outcome o;
  const SignSeries signs = gen_signs(1'000'000, 0.5, 0.3, seed_for("ac2"));
  for (double beta : {0.10, 0.25, 0.45}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double slope = signature_slope(signs, beta);
    const double secs = seconds_since(t0);
    bool ok = secs < kAc2Seconds;
    if (beta < 0.2) ok = ok && slope > kAc2Super;
    else if (beta < 0.3) ok = ok && std::abs(slope) <= kAc2Flat;
    else ok = ok && slope < kAc2Sub;
    o.check(ok, fmt("beta %.2f: slope %+.3f in %.1fs", beta, slope, secs));
  }
  return o;
}

// ------------------------------------------------------------------ AC3
Outcome ac3() {
  Outcome o;
  const Index L = 1000, lags = 100;
  for (auto [gamma, beta] : {std::pair{0.5, 0.25}, std::pair{0.3, 0.4}, std::pair{0.8, 0.1}}) {
    const SignSeries signs = gen_signs(1'000'000, gamma, 0.3, seed_for(fmt("ac3/%g/%g", gamma, beta)));
    const Kernel k = make_kernel(PowerLawKernel{1.0, beta, 0.0}, L);
    const PriceSeries p = build_price(signs, k);
    const LagCurve r = response(p, signs, lags);
    const LagCurve c = estimate_sign_corr(signs, 2 * L);
    const LagCurve pred = predicted_response(k, c, {}, lags);
    double worst = 0.0;
    for (Index l = 1; l <= lags; ++l) worst = std::max(worst, std::abs(r.values[l] - pred.values[l]) / r.std_error[l]);
    o.check(worst <= kAc3Sigmas, fmt("(%.1f,%.2f): max |dev| %.2f se", gamma, beta, worst));
  }
  return o;
}

// ------------------------------------------------------------------ AC4
Outcome ac4() {
  Outcome o;
  const SignSeries signs = gen_signs(1'000'000, 0.5, 0.3, seed_for("ac4"));
  const Kernel k = make_kernel(PermanentKernel{1.0}, 1);
  const PriceSeries p = build_price(signs, k);
  const LagCurve r = response(p, signs, 1000);
  const FitResult fit = fit_powerlaw(r, 10, 1000, {OffsetMode::None, 15, FitWeighting::RelativeValue});
  o.check(std::abs(fit.exponent - kAc4Target) <= kAc4Tol, fmt("growth exponent %.3f", fit.exponent));
  return o;
}

// ------------------------------------------------------------------ AC5
Outcome ac5() {
  Outcome o;
  const Index n = 100'000;
  const SignSeries signs = gen_signs(n, 0.5, 0.3, seed_for("ac5"));
  for (Index order : {1, 50, 500}) {
    const LinearFilter f = fit_linear_predictor(signs, order);
    const double g1 = 0.7;
    const PriceSeries a = surprise_price(signs, f, g1, 100.0);
    const PriceSeries b = build_price(signs, kernel_from_filter(f, g1), 100.0);
    double worst = 0.0;
    for (Index t = 1; t < n; ++t) worst = std::max(worst, std::abs(a.mid[t] - b.mid[t]) / static_cast<double>(t));
    o.check(worst <= kAc5PerStep && a.mid[0] == b.mid[0], fmt("order %ld: max |dp|/t %.2e", long(order), worst));
  }
  return o;
}

// ------------------------------------------------------------------ AC6
Outcome ac6() {
  Outcome o;
  const SignSeries signs = gen_signs(1'000'000, 0.5, 0.3, seed_for("ac6"));
  const Kernel critical = kernel_from_filter(fit_linear_predictor(signs, 512), 1.0);
  const auto crit = conditional_impact(build_price(signs, critical), signs);
  o.check(std::abs(crit.balance) <= kAc6Sigmas * crit.balance_stderr,
          fmt("critical: balance %.2e (%.2f se)", crit.balance, crit.balance / crit.balance_stderr));
  const auto perm = conditional_impact(build_price(signs, make_kernel(PermanentKernel{1.0}, 1)), signs);
  o.check(perm.balance > kAc6Sigmas * perm.balance_stderr,
          fmt("permanent: balance %.3f (%.1f se)", perm.balance, perm.balance / perm.balance_stderr));
  return o;
}

// ------------------------------------------------------------------ AC7
LagCurve planted_corr(double gamma, double c0, Index max_lag) {
  LagCurve c(max_lag);
  c.values[0] = 1.0;
  for (Index l = 1; l <= max_lag; ++l) c.values[l] = c0 * std::pow(static_cast<double>(l), -gamma);
  return c;
}

double relative_rmse(const Eigen::ArrayXd& est, const Eigen::ArrayXd& truth) {
  return std::sqrt((est - truth).square().mean() / truth.square().mean());
}

Outcome ac7() {
  Outcome o;
  const Index L = 200;
  const auto t0 = std::chrono::steady_clock::now();
  const LagCurve c = planted_corr(0.5, 0.3, 2 * L);
  const Kernel truth = make_kernel(PowerLawKernel{1.0, 0.25, 0.0}, L);
  const LagCurve r = predicted_response(truth, c, {}, L);

  const KernelCalibration exact = calibrate_kernel(r, c, 1.0, L, 0.0);
  const double e0 = relative_rmse(exact.kernel.g, truth.g);
  o.check(e0 < kAc7Exact, fmt("noiseless rRMSE %.2e", e0));

  Rng rng = make_rng(seed_for("ac7"));
  std::normal_distribution<double> z(0.0, 0.01);
  LagCurve noisy = r;
  for (Index l = 1; l <= L; ++l) noisy.values[l] *= 1.0 + z(rng);
  const double noise_norm = 0.01 * r.values.segment(1, L).matrix().norm();
  const double ridge = select_ridge_discrepancy(noisy, c, 1.0, L, noise_norm);
  const KernelCalibration reg = calibrate_kernel(noisy, c, 1.0, L, ridge);
  const double e1 = relative_rmse(reg.kernel.g, truth.g);
  const double secs = seconds_since(t0);
  o.check(e1 < kAc7Noisy && secs < kAc7Seconds, fmt("1%% noise rRMSE %.3f (ridge %.2e) in %.1fs", e1, ridge, secs));
  return o;
}

// ------------------------------------------------------------------ AC8
Outcome ac8() {
  Outcome o;
  for (auto [mu, tol] : {std::pair{2.7, kAc8TolMu27}, std::pair{4.0, kAc8TolMu40}}) {
    JumpSynthParams p;
    p.mu = mu;
    const auto syn = synthesize_jump_returns(p, seed_for(fmt("ac8/mu/%g", mu)));
    const auto events = detect_jumps(syn.series, local_vol(syn.series, p.window), 4.0);
    const JumpTail tail = jump_tail(events, p.s_floor);
    o.check(std::abs(tail.fit.exponent - mu) <= tol && tail.events_above >= 1000,
            fmt("mu %.1f: Hill %.3f over %ld", mu, tail.fit.exponent, long(tail.events_above)));
  }
  for (auto [zeta, tol] : {std::pair{0.5, kAc8TolZeta05}, std::pair{1.0, kAc8TolZeta10}}) {
    JumpSynthParams p;
    p.relax_amplitude = 5.0;
    p.zeta = zeta;
    const auto syn = synthesize_jump_returns(p, seed_for(fmt("ac8/zeta/%g", zeta)));
    auto events = detect_jumps(syn.series, local_vol(syn.series, p.window), 4.0);
    std::erase_if(events, [&](const JumpEvent& e) { return e.s_realized <= p.s_floor; });
    events = decluster(events, p.spacing / 2);
    const auto prof = relaxation_profile(syn.series, events, p.spacing / 2);
    o.check(std::abs(-prof.fit.exponent - zeta) <= tol && prof.events_used >= 200,
            fmt("zeta %.1f: fitted %.3f over %ld", zeta, -prof.fit.exponent, long(prof.events_used)));
  }
  return o;
}

// ------------------------------------------------------------------ AC9
Outcome ac9() {
  Outcome o;
  const double A = 10.0, J2 = 0.05;
  Rng rng = make_rng(seed_for("ac9"));
  std::uniform_real_distribution<double> u(0.0, 0.4);
  std::normal_distribution<double> z(0.0, 0.05);
  Eigen::ArrayXd r1(200), s2(200);
  for (Index i = 0; i < 200; ++i) {
    r1[i] = u(rng);
    s2[i] = (A * r1[i] * r1[i] + J2) * (1.0 + z(rng));
  }
  const VolDecomposition d = vol_decomposition(s2, r1.square());
  const double planted_share = J2 / (A * r1.square() + J2).mean();
  o.check(std::abs(d.A / A - 1.0) <= kAc9TolA, fmt("A %.3f", d.A));
  o.check(std::abs(d.J2 / J2 - 1.0) <= kAc9TolJ2, fmt("J2 %.4f", d.J2));
  o.check(d.impact_dominated == (planted_share < kImpactDominatedShare),
          fmt("share %.3f (planted %.3f) flag %d", d.jump_share, planted_share, int(d.impact_dominated)));
  return o;
}

// ------------------------------------------------------------------ AC10
Outcome ac10() {
  Outcome o;
  {
    FeedbackParams p;
    p.loop_gain = 0.5;
    const auto s = simulate_feedback(p, 2000, 1);
    const auto [fs, fv] = fixed_point(p);
    const double err = std::max(std::abs(s.spread[s.size() - 1] - fs), std::abs(s.vol[s.size() - 1] - fv));
    o.check(err <= kAc10FixedPoint && std::abs(fv - p.c * fs) <= kAc10FixedPoint,
            fmt("fixed point err %.1e (radius %.2f)", err, stability_threshold(p)));
  }
  for (auto [gain, want_unstable] : {std::pair{0.5, false}, std::pair{1.5, true}}) {
    FeedbackParams p;
    p.loop_gain = gain;
    p.noise_s = 0.1;
    p.noise_v = 0.05;
    int unstable = 0;
    for (int k = 0; k < 100; ++k)
      if (simulate_feedback(p, 100'000, seed_for(fmt("ac10/%g/%d", gain, k))).outcome == FeedbackOutcome::Unstable)
        ++unstable;
    const double freq = unstable / 100.0;
    const double radius = stability_threshold(p);
    o.check(want_unstable ? freq > kAc10Unstable : freq < kAc10Stable,
            fmt("radius %.2f: unstable %.2f", radius, freq));
  }
  for (double c : {0.3, 0.5, 1.0}) {
    FeedbackParams p;
    p.c = c;
    p.loop_gain = 0.5;
    p.noise_s = 0.1;
    p.noise_v = 0.05 * c;
    p.sigma0 = c * p.s0;
    const auto s = simulate_feedback(p, 100'000, seed_for(fmt("ac10/ratio/%g", c)));
    const double ratio = (s.vol / s.spread).mean();
    o.check(std::abs(ratio / c - 1.0) <= kAc10Ratio, fmt("c %.1f: <sigma/S> %.4f", c, ratio));
  }
  return o;
}

#ifdef IMPACT_ACCEPTANCE_CLI
// ------------------------------------------------------------------ AC11
Outcome ac11() {
  namespace fs = std::filesystem;
  Outcome o;
  const fs::path root = fs::temp_directory_path() / fmt("impact-ac11-%d", int(::getpid()));
  for (const std::string& exp : cli::data_experiments()) {
    const cli::RunConfig cfg = cli::small_config(exp);
    const auto a = cli::run(cfg, root / (exp + "-a")).outputs;
    const auto b = cli::run(cfg, root / (exp + "-b")).outputs;
    o.check(a == b && !a.empty(), fmt("%s: %zu outputs", exp.c_str(), a.size()));
  }
  fs::remove_all(root);
  return o;
}
#endif

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
#ifdef IMPACT_ACCEPTANCE_CLI
      {"AC11", ac11},
#endif
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (argc > 1 && name != argv[1]) continue;
    Outcome r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%-5s %s  %s\n", name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
