#include "impact/cli/experiments.hpp"

#include "../parallel.hpp"
#include "impact/calibration.hpp"
#include "impact/feedback.hpp"
#include "impact/io.hpp"
#include "impact/jumps.hpp"
#include "impact/propagator.hpp"
#include "impact/random.hpp"
#include "impact/surprise.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>

namespace impact::cli {

namespace {

Json fit_json(const FitResult& f) {
  Json j{{"amplitude", f.amplitude}, {"exponent", f.exponent},   {"stderr", f.stderr_exponent},
         {"range", {f.range_lo, f.range_hi}}, {"residual", f.residual}, {"points", f.points}};
  if (f.asymptote != 0.0) j["asymptote"] = f.asymptote;
  return j;
}

// Optional estimates: a failure is recorded in the stats instead of
// aborting the stage.
template <class F>
Json try_fit(F body) {
  try {
    return fit_json(body());
  } catch (const std::exception& e) {
    return Json{{"error", e.what()}};
  }
}

struct Run {
  const RunConfig& cfg;
  OutputDir out;
  Json stages = Json::object();
  std::optional<io::TradeSeries> flow;  // signs and marks
  bool priced = false;                  // flow->mid is set
  std::optional<Kernel> planted;
  double K = 1.0;

  Run(const RunConfig& c, const fs::path& dir) : cfg(c), out(dir) {}

  std::uint64_t seed(const std::string& stream) const { return substream_seed(cfg.seed, stream); }
};

thread_local std::string failed_stage_name;

// Failures carry the stage name in their message and keep their type; the
// innermost failing stage is also remembered for the error record.
template <class F>
void stage(Run& r, const std::string& name, F body) {
  Json stats = Json::object();
  try {
    body(stats);
  } catch (const ConfigError& e) {
    if (failed_stage_name.empty()) failed_stage_name = name;
    throw ConfigError(name + ": " + e.what());
  } catch (const DataError& e) {
    if (failed_stage_name.empty()) failed_stage_name = name;
    throw DataError(name + ": " + e.what());
  } catch (const NumericError& e) {
    if (failed_stage_name.empty()) failed_stage_name = name;
    throw NumericError(name + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    if (failed_stage_name.empty()) failed_stage_name = name;
    throw std::invalid_argument(name + ": " + e.what());
  }
  r.stages[name] = std::move(stats);
}

ConvolutionMethod method_of(const std::string& m) {
  if (m == "direct") return ConvolutionMethod::Direct;
  if (m == "fft") return ConvolutionMethod::FFT;
  return ConvolutionMethod::Auto;
}

Kernel configured_kernel(const RunConfig& cfg, Index n) {
  const auto& p = cfg.propagator;
  if (p.family == "file") return io::read_kernel_csv(cfg.io.kernel);
  const Index L = p.truncation == 0 ? n : p.truncation;
  if (p.family == "permanent") return make_kernel(PermanentKernel{p.g0}, 1);
  if (p.family == "exponential") return make_kernel(ExponentialKernel{p.g0, p.tau}, L);
  return make_kernel(PowerLawKernel{p.gamma0, p.beta, p.l0}, L);
}

// ----------------------------------------------------------------- stages

void ensure_flow(Run& r) {
  if (r.flow) return;
  const auto& cfg = r.cfg;
  if (!cfg.io.trades.empty()) {
    stage(r, "ingest", [&](Json& st) {
      io::TradeSeries t = io::read_trades(cfg.io.trades);
      st["path"] = cfg.io.trades;
      st["n"] = t.size();
      st["has_mid"] = t.mid.has_value();
      r.K = (t.spreads * t.volumes.pow(cfg.orderflow.psi)).mean();
      r.priced = t.mid.has_value();
      r.flow = std::move(t);
    });
    return;
  }
  stage(r, "generate", [&](Json& st) {
    const auto& o = cfg.orderflow;
    const std::uint64_t s = r.seed("orderflow/signs");
    SignSeries signs = o.sign_model == "markov" ? gen_markov_signs(o.n, o.p_repeat, s)
                       : o.sign_model == "iid"  ? gen_signs(o.n, std::numeric_limits<double>::infinity(), o.c0, s)
                                                : gen_signs(o.n, o.gamma, o.c0, s);
    const MarkSeries marks = gen_marks(o.n, o.spread_law, o.volume_law, o.psi, r.seed("orderflow/marks"));
    r.K = law_moment(o.spread_law, 1.0) * law_moment(o.volume_law, o.psi);
    io::TradeSeries t{signs.values(), marks.volumes, marks.spreads, std::nullopt};
    io::write_trades_csv(r.out.file("orderflow.csv"), t);

    const Index lags = std::min(o.corr_lags, o.n / 10);
    const LagCurve c = estimate_sign_corr(signs, lags);
    io::write_lag_curve_csv(r.out.file("sign_corr.csv"), c);
    st["n"] = o.n;
    st["sign_model"] = o.sign_model;
    st["mean_sign"] = signs.values().mean();
    st["corr_lag1"] = c.values[1];
    st["K"] = r.K;
    const Index hi = std::min(cfg.propagator.fit_hi, lags);
    if (o.sign_model == "long_memory" && hi > cfg.propagator.fit_lo) {
      st["planted_gamma"] = o.gamma;
      st["gamma_fit"] = try_fit([&] {
        auto f = fit_powerlaw(c, cfg.propagator.fit_lo, hi, {OffsetMode::None, 15, FitWeighting::RelativeValue});
        f.exponent = -f.exponent;
        return f;
      });
    }
    r.flow = std::move(t);
  });
}

void ensure_priced(Run& r) {
  ensure_flow(r);
  if (r.priced) return;
  stage(r, "simulate", [&](Json& st) {
    const auto& p = r.cfg.propagator;
    const SignSeries signs(r.flow->signs);
    const MarkSeries marks = r.flow->marks(r.cfg.orderflow.psi);
    const Kernel k = configured_kernel(r.cfg, signs.size());
    const PriceSeries price = build_price(signs, marks, k, p.p0, method_of(p.method));
    r.flow->mid = price.mid;
    r.priced = true;
    r.planted = k;
    io::write_trades_csv(r.out.file("trades.csv"), *r.flow);
    io::write_kernel_csv(r.out.file("kernel.csv"), k);
    st["family"] = p.family;
    if (p.family == "power_law") st["beta"] = p.beta;
    if (r.cfg.orderflow.sign_model == "long_memory") st["critical_beta"] = critical_beta(r.cfg.orderflow.gamma);
    st["truncation"] = k.truncation();
    st["tail"] = k.tail;
    st["method"] = p.method;
    st["final_mid"] = price.mid[price.size() - 1];
  });
}

void run_estimate(Run& r) {
  ensure_priced(r);
  stage(r, "estimate", [&](Json& st) {
    const auto& p = r.cfg.propagator;
    const int threads = r.cfg.threads;
    const SignSeries signs(r.flow->signs);
    const PriceSeries price = *r.flow->price();
    const Index n = signs.size();
    const Index cap = n / 10;
    const Index lo = p.fit_lo;

    const LagCurve c = estimate_sign_corr(signs, std::min(std::max(r.cfg.orderflow.corr_lags, p.fit_hi), cap));
    const LagCurve resp = response(price, signs, std::min(p.response_lags, cap), threads);
    const LagCurve sig = signature_plot(price, std::min(p.signature_lags, cap), threads);
    io::write_lag_curve_csv(r.out.file("sign_corr.csv"), c);
    io::write_lag_curve_csv(r.out.file("response.csv"), resp);
    io::write_lag_curve_csv(r.out.file("signature.csv"), sig, 1);

    st["n"] = n;
    st["response_lag1"] = resp.values[1];
    if (std::min(p.fit_hi, c.max_lag()) > lo)
      st["gamma_fit"] = try_fit([&] {
        auto f = fit_powerlaw(c, lo, std::min(p.fit_hi, c.max_lag()), {OffsetMode::None, 15, FitWeighting::RelativeValue});
        f.exponent = -f.exponent;
        return f;
      });
    if (std::min(p.fit_hi, resp.max_lag()) > lo)
      st["response_fit"] = try_fit([&] {
        return fit_powerlaw(resp, lo, std::min(p.fit_hi, resp.max_lag()), {OffsetMode::None, 15, FitWeighting::RelativeValue});
      });
    const Index shi = std::min(p.fit_hi, sig.max_lag());
    if (shi > lo) {
      st["signature_fit"] = try_fit([&] { return fit_powerlaw(sig, lo, shi); });
      st["signature_flatness_ratio"] = sig.values[shi] / sig.values[lo];
    }

    const ConditionalImpactReport ci = conditional_impact(price, signs);
    r.out.json("conditional.json", Json{{"p_plus", ci.p_plus},
                                        {"g_plus", ci.g_plus},
                                        {"g_minus", ci.g_minus},
                                        {"balance", ci.balance},
                                        {"balance_stderr", ci.balance_stderr}});
    st["conditional_balance"] = ci.balance;
    st["conditional_balance_stderr"] = ci.balance_stderr;
    st["conditional_balance_z"] = ci.balance / ci.balance_stderr;
    st["balanced_g_minus"] = balanced_reversal_impact(ci.p_plus, ci.g_plus);

    const Index order = std::min(r.cfg.surprise.order, cap - 1);
    const LinearFilter f = fit_linear_predictor(signs, order, r.cfg.surprise.max_condition);
    io::write_filter_csv(r.out.file("filter.csv"), f);
    io::write_kernel_csv(r.out.file("kernel_surprise.csv"), kernel_from_filter(f, r.cfg.surprise.g1));
    st["filter_order"] = order;
    st["filter_gain_bound"] = f.gain_bound();
  });
}

void run_calibrate(Run& r) {
  ensure_priced(r);
  stage(r, "calibrate", [&](Json& st) {
    const auto& k = r.cfg.calibration;
    const SignSeries signs(r.flow->signs);
    const PriceSeries price = *r.flow->price();
    const Index L = k.truncation;
    if (signs.size() < 20 * L) throw DataError("series shorter than 20 times the calibration truncation");
    const LagCurve resp = response(price, signs, L, r.cfg.threads);
    const LagCurve c = estimate_sign_corr(signs, L);
    double ridge = k.ridge;
    if (ridge < 0.0) {
      const double noise_norm = k.noise * resp.values.segment(1, L).matrix().norm();
      ridge = select_ridge_discrepancy(resp, c, r.K, L, noise_norm, k.difference_order);
    }
    const KernelCalibration cal = calibrate_kernel(resp, c, r.K, L, ridge, k.difference_order);
    io::write_kernel_csv(r.out.file("kernel_calibrated.csv"), cal.kernel);
    st["truncation"] = L;
    st["ridge"] = ridge;
    st["condition_number"] = cal.condition_number;
    st["rank"] = cal.rank;
    st["residual_norm"] = cal.residual_norm;
    if (r.planted && r.planted->truncation() >= L) {
      Eigen::ArrayXd truth(L);
      for (Index l = 1; l <= L; ++l) truth[l - 1] = r.planted->at(l);
      st["relative_rmse_vs_planted"] = std::sqrt((cal.kernel.g - truth).square().mean() / truth.square().mean());
    }
  });

  stage(r, "volatility", [&](Json& st) {
    const auto& v = r.cfg.volatility;
    io::AssetTable t;
    if (!r.cfg.io.assets.empty()) {
      t = io::read_assets_csv(r.cfg.io.assets);
      st["path"] = r.cfg.io.assets;
    } else {
      Rng rng = make_rng(r.seed("volatility/assets"));
      std::uniform_real_distribution<double> u(0.0, v.r1_max);
      std::normal_distribution<double> z(0.0, 1.0);
      t.sigma1_sq.resize(v.assets);
      t.r1_sq.resize(v.assets);
      for (Index i = 0; i < v.assets; ++i) {
        const double r1 = u(rng);
        t.names.push_back("A" + std::to_string(i));
        t.r1_sq[i] = r1 * r1;
        t.sigma1_sq[i] = std::max(0.0, (v.A * r1 * r1 + v.J2) * (1.0 + v.noise * z(rng)));
      }
      io::write_assets_csv(r.out.file("assets.csv"), t);
      st["planted_A"] = v.A;
      st["planted_J2"] = v.J2;
      st["planted_share"] = v.J2 / (v.A * t.r1_sq + v.J2).mean();
    }
    const VolDecomposition d = vol_decomposition(
        t.sigma1_sq, t.r1_sq, v.weighting == "ordinary" ? RegressionWeighting::Ordinary : RegressionWeighting::Relative);
    st["assets"] = t.sigma1_sq.size();
    st["A"] = d.A;
    st["J2"] = d.J2;
    st["r2"] = d.r2;
    st["jump_share"] = d.jump_share;
    st["intercept_clamped"] = d.intercept_clamped;
    st["impact_dominated"] = d.impact_dominated;
  });
}

NewsFeed synthetic_news(const SyntheticJumps& syn, const JumpsConfig& jp, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> offset(-1, 3);
  std::vector<std::pair<double, std::string>> items;
  for (Index bin : syn.jump_bins)
    if (u(rng) < jp.news_share) items.emplace_back(static_cast<double>(bin + offset(rng)), jp.ticker);
  const double n = static_cast<double>(syn.series.size());
  std::poisson_distribution<Index> count(jp.news_noise_rate * n / 1e4);
  const Index extra = count(rng);
  for (Index i = 0; i < extra; ++i)
    items.emplace_back(std::floor(u(rng) * n), u(rng) < 0.5 ? jp.ticker : std::string("OTHER"));
  std::sort(items.begin(), items.end());
  NewsFeed feed;
  feed.timestamps.resize(static_cast<Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    feed.timestamps[static_cast<Index>(i)] = items[i].first;
    feed.tickers.push_back(items[i].second);
  }
  return feed;
}

void run_jumps(Run& r) {
  stage(r, "jumps", [&](Json& st) {
    const auto& jp = r.cfg.jumps;
    ReturnSeries series;
    std::optional<SyntheticJumps> syn;
    if (!r.cfg.io.returns.empty()) {
      series = drop_session_gaps(io::read_returns_csv(r.cfg.io.returns));
      st["returns_path"] = r.cfg.io.returns;
    } else {
      syn = synthesize_jump_returns(jp.synth, r.seed("jumps/returns"));
      series = syn->series;
      io::write_returns_csv(r.out.file("returns.csv"), series);
      st["planted_mu"] = jp.synth.mu;
      st["planted_jumps"] = syn->jump_bins.size();
      if (jp.synth.relax_amplitude > 0.0) st["planted_zeta"] = jp.synth.zeta;
    }
    NewsFeed feed;
    if (!r.cfg.io.news.empty()) {
      feed = io::read_news_csv(r.cfg.io.news);
    } else if (syn) {
      feed = synthetic_news(*syn, jp, r.seed("jumps/news"));
      io::write_news_csv(r.out.file("news.csv"), feed);
    }

    const LocalVol vol = local_vol(series, jp.synth.window);
    auto events = match_news(detect_jumps(series, vol, jp.s), feed, jp.ticker, jp.news_before, jp.news_after);
    io::write_events_csv(r.out.file("events.csv"), events);
    st["events"] = events.size();

    std::map<std::string, std::vector<JumpEvent>> classes{{"all", events}};
    for (const auto& e : events) classes[to_string(e.classification)].push_back(e);
    Json tails = Json::object();
    std::map<std::string, std::pair<FitResult, Index>> fitted;
    for (const auto& [name, group] : classes) {
      try {
        const JumpTail t = jump_tail(group, jp.s_min);
        io::write_cumulative_csv(r.out.file("cumulative_" + name + ".csv"), t.cumulative);
        tails[name] = fit_json(t.fit);
        tails[name]["events_above"] = t.events_above;
        fitted[name] = {t.fit, t.events_above};
      } catch (const DataError& e) {
        if (name == "all") throw;
        tails[name] = Json{{"error", e.what()}};
      }
    }
    st["tail"] = tails;
    if (fitted.count("news") && fitted.count("no_news") &&
        fitted["news"].first.exponent != fitted["no_news"].first.exponent) {
      const auto& [a, na] = fitted["news"];
      const auto& [b, nb] = fitted["no_news"];
      st["tail_crossover_s"] = tail_crossover(a, na, b, nb);
    }

    std::vector<JumpEvent> large;
    for (const auto& e : events)
      if (e.s_realized > jp.s_min) large.push_back(e);
    large = decluster(large, jp.horizon);
    Json relax = Json::object();
    try {
      const auto all = relaxation_profile(series, large, jp.horizon);
      io::write_lag_curve_csv(r.out.file("relaxation_all.csv"), all.profile, 1);
      relax["all"] = fit_json(all.fit);
      relax["all"]["events"] = all.events_used;
      for (const auto& [cls, prof] : relaxation_by_class(series, large, jp.horizon)) {
        const std::string name = to_string(cls);
        io::write_lag_curve_csv(r.out.file("relaxation_" + name + ".csv"), prof.profile, 1);
        relax[name] = fit_json(prof.fit);
        relax[name]["events"] = prof.events_used;
      }
    } catch (const DataError& e) {
      relax["error"] = e.what();
    }
    st["relaxation"] = relax;
  });
}

Json crisis_json(const CrisisStatistics& c) {
  auto mean = [](const auto& v) {
    double s = 0.0;
    for (auto x : v) s += static_cast<double>(x);
    return v.empty() ? kNaN : s / static_cast<double>(v.size());
  };
  Json j{{"episodes", c.episodes},
         {"flagged_bins", c.flagged_bins},
         {"mean_duration", mean(c.durations)},
         {"mean_inter_crisis", mean(c.inter_crisis)}};
  if (c.size_tail) j["size_tail"] = fit_json(*c.size_tail);
  return j;
}

void run_feedback(Run& r) {
  stage(r, "feedback", [&](Json& st) {
    const auto& f = r.cfg.feedback;
    const CoupledSeries s = simulate_feedback(f.params, f.n, r.seed("feedback/trajectory"));
    io::write_coupled_csv(r.out.file("coupled.csv"), s);
    const auto [fs_, fv] = fixed_point(f.params);
    st["spectral_radius"] = stability_threshold(f.params);
    st["outcome"] = to_string(s.outcome);
    if (s.unstable_at) st["unstable_at"] = *s.unstable_at;
    st["fixed_point"] = {fs_, fv};
    st["mean_vol_over_spread"] = (s.vol / s.spread).mean();
    st["crisis"] = crisis_json(crisis_statistics(s, f.params.crisis_multiple));

    if (f.sweep_loop_gains.empty()) return;
    const Index points = static_cast<Index>(f.sweep_loop_gains.size());
    const Index runs = points * f.sweep_seeds;
    std::vector<CoupledSeries> results(static_cast<std::size_t>(runs));
    detail::parallel_for(0, runs, r.cfg.threads, [&](Index i) {
      FeedbackParams p = f.params;
      p.loop_gain = f.sweep_loop_gains[static_cast<std::size_t>(i / f.sweep_seeds)];
      results[static_cast<std::size_t>(i)] = simulate_feedback(
          p, f.n, r.seed("feedback/sweep/" + std::to_string(i / f.sweep_seeds) + "/" + std::to_string(i % f.sweep_seeds)));
    });
    Json sweep = Json::object();
    for (Index k = 0; k < points; ++k) {
      FeedbackParams p = f.params;
      p.loop_gain = f.sweep_loop_gains[static_cast<std::size_t>(k)];
      Index unstable = 0, episodes = 0;
      std::vector<double> tails;
      for (Index j = 0; j < f.sweep_seeds; ++j) {
        const auto& s = results[static_cast<std::size_t>(k * f.sweep_seeds + j)];
        if (s.outcome == FeedbackOutcome::Unstable) {
          ++unstable;
          continue;
        }
        const auto c = crisis_statistics(s, p.crisis_multiple);
        episodes += c.episodes;
        if (c.size_tail) tails.push_back(c.size_tail->exponent);
      }
      const Index stable = f.sweep_seeds - unstable;
      double tail_mean = kNaN;
      if (!tails.empty()) {
        tail_mean = 0.0;
        for (double t : tails) tail_mean += t / static_cast<double>(tails.size());
      }
      sweep["loop_gain=" + io::format_double(p.loop_gain)] = {
          {"loop_gain", p.loop_gain},
          {"spectral_radius", stability_threshold(p)},
          {"unstable_fraction", static_cast<double>(unstable) / static_cast<double>(f.sweep_seeds)},
          {"mean_episodes", stable > 0 ? static_cast<double>(episodes) / static_cast<double>(stable) : kNaN},
          {"size_tail_index", tail_mean}};
    }
    r.out.json("sweep.json", sweep);
    st["sweep_points"] = points;
  });
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest finish(Run& r, const std::string& experiment, std::chrono::steady_clock::time_point t0,
                   const std::string& started) {
  RunManifest m;
  m.version = IMPACT_VERSION;
  m.experiment = experiment;
  m.seed = r.cfg.seed;
  m.config = to_json(r.cfg);
  m.started_utc = started;
  m.stages = r.stages;
  m.outputs = r.out.inventory();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic(r.out.root() / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace

std::vector<std::string> data_experiments() {
  std::vector<std::string> v;
  for (const auto& n : experiment_names())
    if (n != "report") v.push_back(n);
  return v;
}

const std::string& failed_stage() { return failed_stage_name; }

RunManifest run(const RunConfig& cfg, const fs::path& out_dir) {
  failed_stage_name.clear();
  if (cfg.experiment.empty()) throw ConfigError("config.experiment: no experiment selected");
  if (cfg.experiment == "report") {
    std::vector<fs::path> paths(cfg.io.manifests.begin(), cfg.io.manifests.end());
    return report(paths, out_dir, cfg);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  Run r(cfg, out_dir);
  const std::string& e = cfg.experiment;
  if (e == "generate") {
    ensure_flow(r);
  } else if (e == "simulate") {
    ensure_priced(r);
  } else if (e == "estimate") {
    run_estimate(r);
  } else if (e == "calibrate") {
    run_calibrate(r);
  } else if (e == "jumps") {
    run_jumps(r);
  } else if (e == "feedback") {
    run_feedback(r);
  } else if (e == "full-pipeline") {
    run_estimate(r);
    run_calibrate(r);
    run_jumps(r);
    run_feedback(r);
  } else {
    throw ConfigError("config.experiment: unknown experiment '" + e + "'");
  }
  return finish(r, e, t0, started);
}

RunConfig small_config(const std::string& experiment) {
  RunConfig c;
  c.experiment = experiment;
  c.seed = 7;
  c.orderflow.n = 20'000;
  c.orderflow.corr_lags = 200;
  c.propagator.truncation = 500;
  c.propagator.response_lags = 200;
  c.propagator.signature_lags = 200;
  c.propagator.fit_hi = 200;
  c.surprise.order = 64;
  c.calibration.truncation = 50;
  c.volatility.assets = 50;
  c.jumps.synth.n = 60'000;
  c.jumps.synth.relax_amplitude = 3.0;
  c.jumps.horizon = 100;
  c.feedback.n = 5'000;
  c.feedback.params.loop_gain = 0.9;
  c.feedback.params.noise_s = 0.2;
  c.feedback.params.noise_v = 0.1;
  c.feedback.sweep_loop_gains = {0.5, 0.9};
  c.feedback.sweep_seeds = 3;
  return c;
}

}  // namespace impact::cli
