// impactsim: runs the order-flow / impact experiments from a JSON config.

#include "impact/cli/config.hpp"
#include "impact/cli/experiments.hpp"
#include "impact/core.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using impact::cli::Json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kNumeric = 4 };

int fail(int code, const char* kind, const std::string& message, const std::optional<fs::path>& out) {
  Json record{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}};
  if (!impact::cli::failed_stage().empty()) record["stage"] = impact::cli::failed_stage();
  std::cerr << record.dump() << std::endl;
  if (out) {
    std::error_code ec;
    fs::create_directories(*out, ec);
    std::ofstream f(*out / "error.json");
    if (f) f << record.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trade-sign, propagator, jump and spread/volatility feedback experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> manifests;
  for (const auto& name : impact::cli::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    if (name == "report") sub->add_option("manifests", manifests, "manifest.json files to aggregate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  std::optional<fs::path> out_dir;
  try {
    impact::cli::RunConfig cfg = config_path.empty() ? impact::cli::RunConfig{} : impact::cli::load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != experiment)
      throw impact::cli::ConfigError("config.experiment is '" + cfg.experiment + "' but the subcommand is '" +
                                     experiment + "'");
    cfg.experiment = experiment;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out.empty()) cfg.out = out;
    cfg.io.manifests.insert(cfg.io.manifests.end(), manifests.begin(), manifests.end());
    out_dir = fs::path(cfg.out);

    const auto m = impact::cli::run(cfg, *out_dir);
    std::cout << Json{{"status", "ok"},
                      {"experiment", m.experiment},
                      {"manifest", (*out_dir / "manifest.json").string()},
                      {"outputs", m.outputs.size()},
                      {"wall_seconds", m.wall_seconds}}
                     .dump()
              << std::endl;
    return kOk;
  } catch (const impact::cli::ConfigError& e) {
    return fail(kConfig, "config", e.what(), out_dir);
  } catch (const std::invalid_argument& e) {
    return fail(kConfig, "config", e.what(), out_dir);
  } catch (const impact::DataError& e) {
    return fail(kData, "data", e.what(), out_dir);
  } catch (const impact::NumericError& e) {
    return fail(kNumeric, "numeric", e.what(), out_dir);
  } catch (const fs::filesystem_error& e) {
    return fail(kData, "data", e.what(), out_dir);
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what(), out_dir);
  }
}
