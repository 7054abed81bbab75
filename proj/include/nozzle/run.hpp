#pragma once

// Subcommand drivers behind the nozzle_limit executable. Each returns a process
// exit status; all files are written from the calling thread.

#include "nozzle/config.hpp"
#include "nozzle/io.hpp"
#include "nozzle/limit_harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nozzle {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int breakdown = 3;
inline constexpr int partial = 4;
inline constexpr int out_of_bracket = 5;
inline constexpr int resolution = 6;
}  // namespace exit_code

struct Overrides {
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::vector<double>> gammas;
};

/// Applies command-line overrides and revalidates.
RunConfig apply_overrides(RunConfig cfg, const Overrides& ov);

/// The configured m; the choking-fraction rule uses the smallest choking flux over
/// the gamma list.
double resolve_mass_flux(const RunConfig& cfg);

std::shared_ptr<const MappedGrid> make_grid(const RunConfig& cfg);

/// Sweep inputs for a config; throws ChokedError when m cannot be fixed.
SweepSetup sweep_setup(const RunConfig& cfg);

int run_solve(const RunConfig& cfg, std::ostream& log);
int run_sweep(const RunConfig& cfg, std::ostream& log);
int run_check(const RunConfig& cfg, std::ostream& log);
/// Re-plots and summarises an existing sweep directory.
int run_report(const std::filesystem::path& dir, std::ostream& log);

/// Loads the config (when given), applies overrides and dispatches; schema errors map to exit 2.
int run_command(const std::string& command, const std::string& config_path, const Overrides& ov,
                std::ostream& log, std::ostream& err);

CsvTable sweep_metrics_csv(const SweepReport& rep);
nlohmann::json sweep_report_json(const SweepReport& rep, const RunConfig& cfg);

}  // namespace nozzle
