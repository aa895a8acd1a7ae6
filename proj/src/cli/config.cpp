#include "impact/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace impact::cli {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"generate", "simulate",  "estimate",      "calibrate",
                                              "jumps",    "feedback",  "full-pipeline", "report"};
  return names;
}

namespace {

// Reads keys from one JSON object and remembers which were consumed, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    read(*it, out, path_ + "." + key);
  }

  template <class T, class Pred>
  void get(const char* key, T& out, Pred ok, const char* rule) {
    get(key, out);
    if (!ok(out)) throw ConfigError(path_ + "." + key + ": " + rule);
  }

  Section child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const Json empty = Json::object();
    return Section(it == j_.end() ? empty : *it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(path_ + "." + k + ": unknown key");
  }

 private:
  std::string where() const { return path_ + ": "; }

  static void read(const Json& v, double& out, const std::string& at) {
    if (!v.is_number()) throw ConfigError(at + ": expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(at + ": must be finite");
  }
  static void read(const Json& v, Index& out, const std::string& at) {
    if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
    out = v.get<Index>();
  }
  static void read(const Json& v, int& out, const std::string& at) {
    if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
    out = v.get<int>();
  }
  static void read(const Json& v, std::uint64_t& out, const std::string& at) {
    if (!v.is_number_unsigned()) throw ConfigError(at + ": expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  static void read(const Json& v, std::string& out, const std::string& at) {
    if (!v.is_string()) throw ConfigError(at + ": expected a string");
    out = v.get<std::string>();
  }
  static void read(const Json& v, std::vector<std::string>& out, const std::string& at) {
    if (!v.is_array()) throw ConfigError(at + ": expected an array of strings");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(at + ": expected an array of strings");
      out.push_back(e.get<std::string>());
    }
  }
  static void read(const Json& v, std::vector<double>& out, const std::string& at) {
    if (!v.is_array()) throw ConfigError(at + ": expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(at + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }
  static void read(const Json& v, MarkLaw& out, const std::string& at) {
    Section s(v, at);
    std::string law;
    s.get("law", law);
    if (law == "constant") {
      ConstantLaw c;
      s.get("value", c.value, [](double x) { return x > 0.0; }, "must be positive");
      out = c;
    } else if (law == "lognormal") {
      LogNormalLaw l;
      s.get("mu", l.mu);
      s.get("sigma", l.sigma, [](double x) { return x >= 0.0; }, "must be nonnegative");
      out = l;
    } else {
      throw ConfigError(at + ".law: expected \"constant\" or \"lognormal\"");
    }
    s.finish();
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

auto positive = [](auto x) { return x > 0; };
auto nonnegative = [](auto x) { return x >= 0; };

auto one_of(std::initializer_list<const char*> options) {
  std::vector<std::string> v(options.begin(), options.end());
  return [v](const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); };
}

Json law_json(const MarkLaw& law) {
  if (const auto* c = std::get_if<ConstantLaw>(&law)) return Json{{"law", "constant"}, {"value", c->value}};
  const auto& l = std::get<LogNormalLaw>(law);
  return Json{{"law", "lognormal"}, {"mu", l.mu}, {"sigma", l.sigma}};
}

}  // namespace

RunConfig parse_config(const Json& j) {
  RunConfig c;
  Section root(j, "config");
  root.get("experiment", c.experiment);
  if (!c.experiment.empty() && !one_of({"generate", "simulate", "estimate", "calibrate", "jumps", "feedback",
                                        "full-pipeline", "report"})(c.experiment))
    throw ConfigError("config.experiment: unknown experiment '" + c.experiment + "'");
  root.get("seed", c.seed);
  root.get("threads", c.threads, positive, "must be positive");
  root.get("out", c.out, [](const std::string& s) { return !s.empty(); }, "must be nonempty");

  {
    auto s = root.child("orderflow");
    auto& o = c.orderflow;
    s.get("n", o.n, [](Index n) { return n >= 100; }, "must be at least 100");
    s.get("sign_model", o.sign_model, one_of({"long_memory", "markov", "iid"}), "expected long_memory, markov or iid");
    s.get("gamma", o.gamma, positive, "must be positive");
    s.get("c0", o.c0, [](double x) { return x > 0.0 && x <= 1.0; }, "must lie in (0, 1]");
    s.get("p_repeat", o.p_repeat, [](double x) { return x >= 0.0 && x <= 1.0; }, "must lie in [0, 1]");
    s.get("spread_law", o.spread_law);
    s.get("volume_law", o.volume_law);
    s.get("psi", o.psi);
    s.get("corr_lags", o.corr_lags, positive, "must be positive");
    s.finish();
  }
  {
    auto s = root.child("propagator");
    auto& p = c.propagator;
    s.get("family", p.family, one_of({"power_law", "permanent", "exponential", "file"}),
          "expected power_law, permanent, exponential or file");
    s.get("gamma0", p.gamma0, positive, "must be positive");
    s.get("beta", p.beta, positive, "must be positive");
    s.get("l0", p.l0, nonnegative, "must be nonnegative");
    s.get("g0", p.g0, positive, "must be positive");
    s.get("tau", p.tau, positive, "must be positive");
    s.get("truncation", p.truncation, nonnegative, "must be nonnegative");
    s.get("method", p.method, one_of({"auto", "direct", "fft"}), "expected auto, direct or fft");
    s.get("p0", p.p0);
    s.get("response_lags", p.response_lags, positive, "must be positive");
    s.get("signature_lags", p.signature_lags, positive, "must be positive");
    s.get("fit_lo", p.fit_lo, positive, "must be positive");
    s.get("fit_hi", p.fit_hi, positive, "must be positive");
    if (p.fit_hi <= p.fit_lo) throw ConfigError("config.propagator.fit_hi: must exceed fit_lo");
    s.finish();
  }
  {
    auto s = root.child("surprise");
    s.get("order", c.surprise.order, positive, "must be positive");
    s.get("g1", c.surprise.g1, positive, "must be positive");
    s.get("max_condition", c.surprise.max_condition, [](double x) { return x > 1.0; }, "must exceed 1");
    s.finish();
  }
  {
    auto s = root.child("calibration");
    auto& k = c.calibration;
    s.get("truncation", k.truncation, positive, "must be positive");
    s.get("ridge", k.ridge);
    s.get("noise", k.noise, positive, "must be positive");
    s.get("difference_order", k.difference_order, [](int d) { return d == 1 || d == 2; }, "must be 1 or 2");
    s.finish();
  }
  {
    auto s = root.child("volatility");
    auto& v = c.volatility;
    s.get("assets", v.assets, [](Index n) { return n >= 10; }, "must be at least 10");
    s.get("A", v.A, nonnegative, "must be nonnegative");
    s.get("J2", v.J2, nonnegative, "must be nonnegative");
    s.get("r1_max", v.r1_max, positive, "must be positive");
    s.get("noise", v.noise, nonnegative, "must be nonnegative");
    s.get("weighting", v.weighting, one_of({"relative", "ordinary"}), "expected relative or ordinary");
    s.finish();
  }
  {
    auto s = root.child("jumps");
    auto& jp = c.jumps;
    s.get("n", jp.synth.n, [](Index n) { return n >= 1000; }, "must be at least 1000");
    s.get("base_vol", jp.synth.base_vol, positive, "must be positive");
    s.get("spacing", jp.synth.spacing, [](Index n) { return n >= 4; }, "must be at least 4");
    s.get("mu", jp.synth.mu, positive, "must be positive");
    s.get("s_floor", jp.synth.s_floor, [](double x) { return x > 1.0; }, "must exceed 1");
    s.get("relax_amplitude", jp.synth.relax_amplitude, nonnegative, "must be nonnegative");
    s.get("zeta", jp.synth.zeta, positive, "must be positive");
    s.get("window", jp.synth.window, [](Index n) { return n >= 2; }, "must be at least 2");
    s.get("s", jp.s, [](double x) { return x > 1.0; }, "must exceed 1");
    s.get("s_min", jp.s_min, [](double x) { return x > 1.0; }, "must exceed 1");
    s.get("horizon", jp.horizon, [](Index n) { return n >= 4; }, "must be at least 4");
    s.get("ticker", jp.ticker, [](const std::string& t) { return !t.empty(); }, "must be nonempty");
    s.get("news_before", jp.news_before, nonnegative, "must be nonnegative");
    s.get("news_after", jp.news_after, nonnegative, "must be nonnegative");
    s.get("news_share", jp.news_share, [](double x) { return x >= 0.0 && x <= 1.0; }, "must lie in [0, 1]");
    s.get("news_noise_rate", jp.news_noise_rate, nonnegative, "must be nonnegative");
    s.finish();
  }
  {
    auto s = root.child("feedback");
    auto& f = c.feedback;
    auto& p = f.params;
    s.get("c", p.c, positive, "must be positive");
    s.get("g_sv", p.g_sv, nonnegative, "must be nonnegative");
    s.get("g_vs", p.g_vs, nonnegative, "must be nonnegative");
    s.get("loop_gain", p.loop_gain, nonnegative, "must be nonnegative");
    s.get("s_ref", p.s_ref, positive, "must be positive");
    s.get("noise_s", p.noise_s, nonnegative, "must be nonnegative");
    s.get("noise_v", p.noise_v, nonnegative, "must be nonnegative");
    s.get("s_floor", p.s_floor, positive, "must be positive");
    s.get("s0", p.s0, positive, "must be positive");
    s.get("sigma0", p.sigma0, nonnegative, "must be nonnegative");
    s.get("crisis_multiple", p.crisis_multiple, positive, "must be positive");
    s.get("blowup", p.blowup, [](double x) { return x > 1.0; }, "must exceed 1");
    s.get("n", f.n, [](Index n) { return n >= 2; }, "must be at least 2");
    s.get("sweep_loop_gains", f.sweep_loop_gains);
    s.get("sweep_seeds", f.sweep_seeds, positive, "must be positive");
    s.finish();
    try {
      validate(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.feedback: ") + e.what());
    }
  }
  {
    auto s = root.child("io");
    s.get("trades", c.io.trades);
    s.get("kernel", c.io.kernel);
    s.get("returns", c.io.returns);
    s.get("news", c.io.news);
    s.get("assets", c.io.assets);
    s.get("manifests", c.io.manifests);
    s.finish();
  }
  root.finish();
  if (c.propagator.family == "file" && c.io.kernel.empty())
    throw ConfigError("config.io.kernel: required when propagator.family is \"file\"");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const RunConfig& c) {
  const auto& o = c.orderflow;
  const auto& p = c.propagator;
  const auto& k = c.calibration;
  const auto& v = c.volatility;
  const auto& jp = c.jumps;
  const auto& f = c.feedback;
  Json j;
  if (!c.experiment.empty()) j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["orderflow"] = {{"n", o.n},
                    {"sign_model", o.sign_model},
                    {"gamma", o.gamma},
                    {"c0", o.c0},
                    {"p_repeat", o.p_repeat},
                    {"spread_law", law_json(o.spread_law)},
                    {"volume_law", law_json(o.volume_law)},
                    {"psi", o.psi},
                    {"corr_lags", o.corr_lags}};
  j["propagator"] = {{"family", p.family},         {"gamma0", p.gamma0},
                     {"beta", p.beta},             {"l0", p.l0},
                     {"g0", p.g0},                 {"tau", p.tau},
                     {"truncation", p.truncation}, {"method", p.method},
                     {"p0", p.p0},                 {"response_lags", p.response_lags},
                     {"signature_lags", p.signature_lags}, {"fit_lo", p.fit_lo},
                     {"fit_hi", p.fit_hi}};
  j["surprise"] = {{"order", c.surprise.order}, {"g1", c.surprise.g1}, {"max_condition", c.surprise.max_condition}};
  j["calibration"] = {{"truncation", k.truncation},
                      {"ridge", k.ridge},
                      {"noise", k.noise},
                      {"difference_order", k.difference_order}};
  j["volatility"] = {{"assets", v.assets}, {"A", v.A},         {"J2", v.J2},
                     {"r1_max", v.r1_max}, {"noise", v.noise}, {"weighting", v.weighting}};
  j["jumps"] = {{"n", jp.synth.n},
                {"base_vol", jp.synth.base_vol},
                {"spacing", jp.synth.spacing},
                {"mu", jp.synth.mu},
                {"s_floor", jp.synth.s_floor},
                {"relax_amplitude", jp.synth.relax_amplitude},
                {"zeta", jp.synth.zeta},
                {"window", jp.synth.window},
                {"s", jp.s},
                {"s_min", jp.s_min},
                {"horizon", jp.horizon},
                {"ticker", jp.ticker},
                {"news_before", jp.news_before},
                {"news_after", jp.news_after},
                {"news_share", jp.news_share},
                {"news_noise_rate", jp.news_noise_rate}};
  j["feedback"] = {{"c", f.params.c},
                   {"g_sv", f.params.g_sv},
                   {"g_vs", f.params.g_vs},
                   {"loop_gain", f.params.loop_gain},
                   {"s_ref", f.params.s_ref},
                   {"noise_s", f.params.noise_s},
                   {"noise_v", f.params.noise_v},
                   {"s_floor", f.params.s_floor},
                   {"s0", f.params.s0},
                   {"sigma0", f.params.sigma0},
                   {"crisis_multiple", f.params.crisis_multiple},
                   {"blowup", f.params.blowup},
                   {"n", f.n},
                   {"sweep_loop_gains", f.sweep_loop_gains},
                   {"sweep_seeds", f.sweep_seeds}};
  j["io"] = {{"trades", c.io.trades},   {"kernel", c.io.kernel}, {"returns", c.io.returns},
             {"news", c.io.news},       {"assets", c.io.assets}, {"manifests", c.io.manifests}};
  return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

}  // namespace impact::cli
