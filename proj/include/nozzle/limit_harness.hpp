#pragma once

// The gamma -> infinity harness: framework-condition checks, the L^q-norm law,
// weak residuals against a fixed bump family, the div-curl commutation defect,
// Gauss-Green normal traces and power-law fits.

#include "nozzle/core.hpp"
#include "nozzle/geometry.hpp"
#include "nozzle/nozzle_solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

class HarnessInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FitError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// scale * b((x - cx)/sx) * b((y - cy)/sy),  b(s) = (1 - s^2)^3 on |s| < 1.
struct Bump {
    double cx = 0.0;
    double cy = 0.0;
    double sx = 1.0;
    double sy = 1.0;
    double scale = 1.0;

    double value(double x, double y) const;
    std::array<double, 2> gradient(double x, double y) const;
    /// Integral over the plane.
    double integral() const;
};

/// int_{-1}^{1} (1 - s^2)^n ds
double bump_moment(int n);

struct TestFunctionFamily {
    std::vector<Bump> bumps;

    /// 3 scales x 4 centres on the channel midline inside |xi| <= core_fraction * L,
    /// each normalised to unit L2 norm.
    static TestFunctionFamily interior(const MappedGrid& grid, double core_fraction = 0.5);
    /// Bumps centred on the walls across the transition region, normalised to unit
    /// integral along the wall.
    static TestFunctionFamily wall(const MappedGrid& grid, std::vector<double> centers = {-2.0, 0.0, 2.0},
                                   double sx = 2.0, double sy = 0.3);
};

/// Interior family supports must stay two cells away from walls, inlet and outlet.
void validate_supports(const TestFunctionFamily& family, const MappedGrid& grid);

/// Cell values and the vertex-based discrete gradient of a bump. The gradient is the
/// cell average of the bilinear interpolant's gradient, which makes the pairing with
/// any grad-perp of vertex data sum to zero exactly.
struct DiscreteTestFunction {
    Field value;
    Field dx;
    Field dy;
};

DiscreteTestFunction discretize(const Bump& bump, const MappedGrid& grid);

/// sum over cells of (f1 dphi/dx + f2 dphi/dy) * planar measure.
double pairing(const Field& f1, const Field& f2, const DiscreteTestFunction& phi, const MappedGrid& grid);

/// max over the family of |int F . grad phi - int s phi| (s optional source).
double weak_residual(const Field& f1, const Field& f2, const TestFunctionFamily& family, const MappedGrid& grid,
                     const Field* source = nullptr);

/// Residual maxima, one per equation.
struct SystemResiduals {
    std::vector<std::string> names;
    std::vector<double> values;

    double max() const;
};

/// Compressible system of the solution: full Euler (mass, momentum x2, energy) or
/// homentropic (mass, momentum x2); axisymmetric fluxes are r-weighted.
SystemResiduals compressible_residuals(const StreamSolution& s, const TestFunctionFamily& family);

/// Limit system evaluated on the gamma-solution: for full Euler div u, div(rho u),
/// momentum; for homentropic div u and div(u (x) u) + grad p.
SystemResiduals limit_residuals(const StreamSolution& s, const TestFunctionFamily& family);

/// max |int grad phi . (a u)| with a u the weighted mass flux grad-perp psi.
double incompressibility_functional(const StreamSolution& s, const TestFunctionFamily& family);

struct LqLaw {
    double norm = 0.0;
    double gap = 0.0;
    double jensen_lower = 0.0;
    double holder_upper = 0.0;
    bool chain_holds = true;
};

/// |  || p^(1/gamma) ||_{L^q(core)} - |core|^(1/q) | and the Jensen/Hoelder chain.
LqLaw lq_norm_law(const Field& p, double gamma, double q, const MappedGrid& grid, const Mask& core,
                  double rel_tol = 1e-12);

struct DivCurlPoint {
    int n = 0;
    double compliant = 0.0;
    double violating = 0.0;
    double violating_limit = 0.0;  ///< (1/2) int phi
};

/// Commutation defect on [0, 2 pi]^2 with `cells` cells per axis.
std::vector<DivCurlPoint> divcurl_diagnostic(const std::vector<int>& ns, int cells = 1024);

struct NormalTrace {
    double gauss_green = 0.0;  ///< max over wall bumps of |int u.grad phi + int phi div_h u|
    double wall_flux = 0.0;    ///< max |u.n| ds on wall faces from adjacent cells
};

NormalTrace normal_trace(const Field& u1, const Field& u2, const MappedGrid& grid,
                         const TestFunctionFamily& wall_family);

/// Least-squares slope of log(metric) against log(1/gamma).
double convergence_rate(const std::vector<double>& gammas, const std::vector<double>& metric);

struct ConditionReport {
    double mach_bar = 1.0;
    std::vector<double> sup_mach;
    std::vector<double> l1_speed2;
    std::vector<double> l1_pressure;
    std::vector<double> tv_vorticity;
    std::vector<double> h_value;   ///< int ln E / gamma
    std::vector<double> f1_value;  ///< int ln p / gamma
    std::vector<double> f2_increment;  ///< L1 of consecutive entropy differences
    std::vector<bool> sandwich;

    bool a1 = false;
    double tv_ratio = 0.0;
    bool h_decreasing = false;
    bool f1_decreasing = false;
    double h_reduction = 0.0;   ///< first/last of |H|
    double f1_reduction = 0.0;  ///< first/last of |F1|
    bool sandwich_all = false;
};

ConditionReport check_framework_conditions(const std::vector<const StreamSolution*>& solutions,
                                           const std::vector<double>& gammas, double mach_bar, const Mask& core);

struct SweepMetrics {
    double gamma = 0.0;
    double density_dev_l1 = 0.0;
    double density_dev_linf = 0.0;
    double lq_gap_1 = 0.0;
    double lq_gap_2 = 0.0;
    bool jensen_1 = true;
    bool jensen_2 = true;
    double compressible_residual = 0.0;
    double limit_residual = 0.0;
    double limit_div_u = 0.0;
    double incompressibility = 0.0;
    double normal_trace = 0.0;
    double wall_flux = 0.0;
    double rho_minus_s_l1 = 0.0;
    double reference_distance = 0.0;
    double sup_mach = 0.0;
    int iterations = 0;
    SystemResiduals compressible;
    SystemResiduals limit;
};

enum class SweepProblem { FullEuler2D, Axisymmetric };

struct SweepSetup {
    SweepProblem problem = SweepProblem::Axisymmetric;
    std::shared_ptr<const MappedGrid> grid;
    UpstreamProfiles upstream;
    std::vector<double> gammas;
    double m = 0.0;
    PicardConfig picard;
    double core_fraction = 0.5;
    double mach_bar = 1.0;
    bool reference = true;  ///< homentropic sweeps: distance to the incompressible reference
    int threads = 1;
};

struct SweepFit {
    std::string metric;
    double rate = 0.0;
    bool valid = false;
};

struct SweepReport {
    std::vector<double> gammas;
    std::vector<SweepMetrics> metrics;
    std::vector<std::string> failures;  ///< one per failed gamma, empty when complete
    std::vector<SweepFit> fits;
    ConditionReport conditions;
    TestFunctionFamily family;
    TestFunctionFamily wall_family;
    double m = 0.0;

    bool complete() const { return failures.empty(); }
    std::optional<double> rate(const std::string& metric) const;
};

/// Solve every gamma (concurrently when threads > 1) and evaluate all metrics.
SweepReport gamma_sweep(const SweepSetup& setup);

/// Per-solution metrics (without the reference distance).
SweepMetrics solution_metrics(const StreamSolution& s, const TestFunctionFamily& family,
                              const TestFunctionFamily& wall_family, const Mask& core);

/// L2(core) distance between velocity fields.
double velocity_distance(const FlowState& a, const FlowState& b, const Mask& core);

}  // namespace nozzle
