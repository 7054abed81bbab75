#pragma once

// Property suites run by `nozzle_limit check`: manufactured elliptic solutions,
// the div-curl commutation defect and subsonic-root oracles.

#include "nozzle/elliptic.hpp"
#include "nozzle/geometry.hpp"
#include "nozzle/limit_harness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nozzle {

enum class MmsCase {
    Flat,    ///< unit square, k = 1, psi = sin(pi x) sin(pi y)
    Mapped,  ///< tanh nozzle a = 0.2, b = 1.2, k = 1 + x/4, psi = sin x + y^2 cos(x/2)
};

struct MmsStudy {
    MmsCase which = MmsCase::Flat;
    std::vector<int> ns;
    std::vector<ErrorNorms> errors;
    double order = 0.0;  ///< least-squares slope of log L2 against log h
};

/// Solve on n x n grids (Dirichlet data from the exact solution on every side).
MmsStudy mms_study(MmsCase which, const std::vector<int>& ns);

struct ClosureStudy {
    int samples = 0;
    double max_rel_error = 0.0;      ///< against long-double bisection
    double max_bernoulli_residual = 0.0;  ///< relative to B
    double max_mach = 0.0;
    int failures = 0;  ///< samples that threw
};

/// Random subsonic data (phi2 below the sonic value) for the full-Euler and
/// homentropic roots; `samples` draws of each kind.
ClosureStudy closure_study(int samples, unsigned seed);

struct SuiteResult {
    std::string name;
    bool pass = false;
    nlohmann::json details;
};

SuiteResult run_mms_suite(const std::vector<int>& ns);
/// Throws ResolutionError when a requested n is under-resolved.
SuiteResult run_divcurl_suite(const std::vector<int>& ns, int cells);
SuiteResult run_closure_suite(int samples, unsigned seed);

}  // namespace nozzle
