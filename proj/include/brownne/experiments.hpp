#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brownne/config.hpp"
#include "brownne/report.hpp"

namespace brownne {

/// Names of the experiment subcommands, in CLI order.
const std::vector<std::string>& subcommand_names();

/// Accepted keys for a subcommand; throws ConfigError for unknown names.
const std::vector<KeySpec>& schema_for(std::string_view subcommand);

/// Directory of the bundled digit IDX files (compiled in, overridable with
/// BROWNNE_DATA_DIR).
std::string data_directory();

struct RunResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Tables produced by each subcommand. Pure functions of (config, seed); the
/// thread count never changes a value.
ReportTable ndd_convergence_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads);
ReportTable moments_table(const ExperimentConfig& cfg, std::uint64_t seed);
ReportTable brownian_verify_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads);
ReportTable iam_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads);
/// Per-run rows; the summary table averages them over seeds. A nonempty
/// checkpoint_dir receives one checkpoint per run.
ReportTable mlp_train_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads,
                            const std::string& checkpoint_dir = {});
ReportTable mlp_summary_table(const ReportTable& runs);
ReportTable biased_gd_table(const ExperimentConfig& cfg, std::uint64_t seed, int threads);

/// Runs a subcommand and writes <out_dir>/<subcommand>.csv (plus SVG and the
/// effective config). Creates out_dir if needed.
RunResult run(std::string_view subcommand, const ExperimentConfig& cfg, std::uint64_t seed,
              const std::string& out_dir, int threads);

/// Loads and validates the config file first. An empty path means all defaults.
RunResult run_with_config_file(std::string_view subcommand, const std::string& config_path,
                               std::uint64_t seed, const std::string& out_dir, int threads);

}  // namespace brownne
