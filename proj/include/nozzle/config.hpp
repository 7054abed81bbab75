#pragma once

// Run configuration: a versioned JSON document. Unknown keys are rejected.

#include "nozzle/geometry.hpp"
#include "nozzle/limit_harness.hpp"
#include "nozzle/nozzle_solver.hpp"
#include "nozzle/profiles.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class MassFluxRule {
    Fixed,            ///< m = value
    ChokingFraction,  ///< m = value * (smallest choking flux over the gamma list)
};

struct CheckConfig {
    std::vector<std::string> suites{"mms", "divcurl", "closure"};
    std::vector<int> mms_grids{32, 64, 128};
    std::vector<int> divcurl_ns{8, 16, 32, 64};
    int divcurl_cells = 1024;
    int closure_samples = 1000;
    unsigned closure_seed = 20240611u;
};

struct RunConfig {
    SweepProblem problem = SweepProblem::Axisymmetric;
    double a = 0.0;
    double b = 1.0;
    double r0 = 1.0;
    double half_length = 10.0;
    int n_xi = 128;
    int n_eta = 64;
    std::vector<double> gammas{5.0};
    MassFluxRule m_rule = MassFluxRule::Fixed;
    double m_value = 0.1;
    ProfileSpec bernoulli = ConstantProfile{2.0};
    std::optional<ProfileSpec> entropy;
    PicardConfig picard;
    double core_fraction = 0.5;
    double mach_bar = 1.0;
    bool reference = true;
    std::string rate_metric = "density_dev_linf";
    double rate_low = 0.8;
    double rate_high = 1.2;
    CheckConfig check;
    std::string output = "run";
    int threads = 1;

    NozzleGeometry geometry() const;
    UpstreamProfiles upstream() const;
};

/// Parse and validate; throws ConfigError with a user-facing message.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Canonical echo of a configuration (every field, defaults filled in).
nlohmann::json to_json(const RunConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical echo.
std::string config_hash(const RunConfig& cfg);

/// Checks the invariants shared by file input and command-line overrides.
void validate(const RunConfig& cfg);

}  // namespace nozzle
