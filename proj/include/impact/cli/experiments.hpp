#pragma once

#include "impact/cli/config.hpp"
#include "impact/cli/manifest.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace impact::cli {

/// Runs cfg.experiment into out_dir and writes manifest.json there last.
/// Module errors propagate with the stage name prefixed to the message and
/// their type (DataError, NumericError, std::invalid_argument) preserved.
RunManifest run(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Innermost stage that failed during the last run() on this thread; empty
/// when it succeeded or failed outside any stage.
const std::string& failed_stage();

/// Experiments that produce data outputs (everything except report).
std::vector<std::string> data_experiments();

/// A reduced configuration of the named experiment that runs in seconds.
RunConfig small_config(const std::string& experiment);

/// Aggregates manifests into out_dir: summary.csv, summary.md,
/// signature_vs_beta.csv, copies of plot-ready CSVs under data/, plots.gp.
/// An empty list is a ConfigError.
RunManifest report(const std::vector<std::filesystem::path>& manifests, const std::filesystem::path& out_dir,
                   const RunConfig& cfg);

}  // namespace impact::cli
