#include "impact/cli/experiments.hpp"

#include "impact/io.hpp"

#include <chrono>
#include <fstream>
#include <set>

namespace impact::cli {

namespace {

// Looks up a number at a JSON pointer; NaN when absent or not numeric.
double number_at(const Json& j, const std::string& pointer) {
  const Json::json_pointer p(pointer);
  if (!j.contains(p)) return kNaN;
  const Json& v = j.at(p);
  return v.is_number() ? v.get<double>() : kNaN;
}

std::string cell(double x) { return std::isnan(x) ? "" : io::format_double(x); }

struct Column {
  const char* name;
  std::vector<const char*> pointers;  // first present one wins
};

const std::vector<Column>& columns() {
  static const std::vector<Column> c{
      {"gamma_hat", {"/stages/estimate/gamma_fit/exponent", "/stages/generate/gamma_fit/exponent"}},
      {"beta", {"/config/propagator/beta"}},
      {"response_exponent", {"/stages/estimate/response_fit/exponent"}},
      {"signature_slope", {"/stages/estimate/signature_fit/exponent"}},
      {"signature_flatness_ratio", {"/stages/estimate/signature_flatness_ratio"}},
      {"conditional_balance", {"/stages/estimate/conditional_balance"}},
      {"conditional_balance_z", {"/stages/estimate/conditional_balance_z"}},
      {"kernel_rmse", {"/stages/calibrate/relative_rmse_vs_planted"}},
      {"A", {"/stages/volatility/A"}},
      {"J2", {"/stages/volatility/J2"}},
      {"mu_all", {"/stages/jumps/tail/all/exponent"}},
      {"mu_news", {"/stages/jumps/tail/news/exponent"}},
      {"mu_no_news", {"/stages/jumps/tail/no_news/exponent"}},
      {"zeta_all", {"/stages/jumps/relaxation/all/exponent"}},
      {"spectral_radius", {"/stages/feedback/spectral_radius"}},
  };
  return c;
}

double column_value(const Json& m, const Column& col) {
  for (const char* p : col.pointers) {
    double v = number_at(m, p);
    if (!std::isnan(v)) {
      // Decay exponents are reported as positive rates.
      if (std::string(col.name) == "zeta_all") v = -v;
      return v;
    }
  }
  return kNaN;
}

bool plot_ready(const std::string& name) {
  static const std::set<std::string> fixed{"sign_corr.csv", "response.csv", "signature.csv", "kernel.csv",
                                           "kernel_calibrated.csv", "kernel_surprise.csv", "coupled.csv"};
  return fixed.count(name) || name.rfind("cumulative_", 0) == 0 || name.rfind("relaxation_", 0) == 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace

RunManifest report(const std::vector<fs::path>& manifests, const fs::path& out_dir, const RunConfig& cfg) {
  if (manifests.empty()) throw ConfigError("report: no manifests given");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Json> docs;
  for (const auto& p : manifests) {
    const RunManifest m = read_manifest(p);
    docs.push_back(to_json(m));
  }

  OutputDir out(out_dir);
  std::ostringstream csv, md, gp, betas;
  csv << "manifest,experiment,seed";
  for (const auto& c : columns()) csv << ',' << c.name;
  csv << '\n';
  md << "# Run summary\n\n";
  gp << "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";

  std::vector<std::pair<double, double>> beta_slope;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Json& m = docs[i];
    const fs::path src = manifests[i];
    const std::string tag = "m" + std::to_string(i);
    csv << src.string() << ',' << m["experiment"].get<std::string>() << ',' << m["seed"].get<std::uint64_t>();
    md << "## " << tag << ": " << m["experiment"].get<std::string>() << " (seed " << m["seed"].get<std::uint64_t>()
       << ")\n\n" << "Source: `" << src.string() << "`\n\n| quantity | value |\n|---|---|\n";
    for (const auto& c : columns()) {
      const double v = column_value(m, c);
      csv << ',' << cell(v);
      if (!std::isnan(v)) md << "| " << c.name << " | " << cell(v) << " |\n";
    }
    csv << '\n';
    md << '\n';

    const double beta = number_at(m, "/config/propagator/beta");
    const double slope = number_at(m, "/stages/estimate/signature_fit/exponent");
    if (!std::isnan(slope) && m["config"]["propagator"]["family"] == "power_law") beta_slope.emplace_back(beta, slope);

    for (const auto& o : m["outputs"]) {
      const std::string name = o["path"].get<std::string>();
      if (!plot_ready(name)) continue;
      const fs::path from = src.parent_path() / name;
      if (!fs::exists(from)) throw DataError(src.string() + ": listed output missing: " + name);
      const std::string rel = "data/" + tag + "_" + name;
      fs::copy_file(from, out.file(rel), fs::copy_options::overwrite_existing);
      const bool loglog = name != "coupled.csv" && name.rfind("kernel", 0) != 0;
      gp << "\nset output '" << tag << "_" << fs::path(name).stem().string() << ".png'\n"
         << (loglog ? "set logscale xy\n" : "unset logscale\n")
         << "plot '" << rel << "' using 1:2 with linespoints title '" << tag << " " << name << "'\n";
    }
  }
  std::sort(beta_slope.begin(), beta_slope.end());
  betas << "beta,signature_slope\n";
  for (const auto& [b, s] : beta_slope) betas << io::format_double(b) << ',' << io::format_double(s) << '\n';
  if (!beta_slope.empty()) {
    md << "## Signature-plot slope versus kernel exponent\n\n| beta | slope |\n|---|---|\n";
    for (const auto& [b, s] : beta_slope) md << "| " << cell(b) << " | " << cell(s) << " |\n";
    md << '\n';
    gp << "\nset output 'signature_vs_beta.png'\nunset logscale\n"
       << "plot 'signature_vs_beta.csv' using 1:2 with linespoints title 'slope vs beta'\n";
  }

  write_text(out.file("summary.csv"), csv.str());
  write_text(out.file("summary.md"), md.str());
  write_text(out.file("signature_vs_beta.csv"), betas.str());
  write_text(out.file("plots.gp"), gp.str());

  RunManifest m;
  m.version = IMPACT_VERSION;
  m.experiment = "report";
  m.seed = cfg.seed;
  m.config = to_json(cfg);
  m.stages["report"] = Json{{"manifests", docs.size()}, {"beta_points", beta_slope.size()}};
  m.outputs = out.inventory();
  {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m.started_utc = buf;
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic(out.root() / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace impact::cli
