#pragma once

// Picard iteration for the stream-function form of the nozzle problems.
//
// The weighted mass flux a u = grad-perp psi is reconstructed from vertex values of
// psi, so face fluxes are exact differences and discretely divergence-free. Each
// step pulls cells back to their upstream streamline, closes (p, rho) from
// Bernoulli, evaluates the vorticity law, and solves -div(grad psi / a) = omega.

#include "nozzle/core.hpp"
#include "nozzle/elliptic.hpp"
#include "nozzle/far_field.hpp"
#include "nozzle/geometry.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

struct PicardConfig {
    double relaxation = 0.7;
    int max_outer = 200;
    double outer_tolerance = 1e-8;  ///< L-infinity update relative to psi on the upper wall
    LinearSolveOptions linear{1e-12, 20000, 200};
    int max_halvings = 5;
};

/// psi left the range spanned by the inlet profile.
class SolverStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A candidate iterate has a cell without a subsonic closure even after relaxation halving.
class SubsonicBreakdownError : public std::runtime_error {
public:
    SubsonicBreakdownError(const std::string& what, int row, int col)
        : std::runtime_error(what), row_(row), col_(col) {}
    int row() const { return row_; }
    int col() const { return col_; }

private:
    int row_;
    int col_;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Everything a Picard step needs besides the iterate.
struct StreamProblem {
    std::shared_ptr<const MappedGrid> grid;
    FarFieldState far_field;
    BoundarySpec boundary;
};

/// Walls at 0 and psi_-(1), inlet psi_-(eta), outlet zero-Neumann; axis on axisymmetric grids.
StreamProblem make_stream_problem(std::shared_ptr<const MappedGrid> grid, FarFieldState far_field);

/// Upstream labels (psi_-)^{-1}(psi) in [0, 1].
Field streamline_pullback(const Field& psi, const FarFieldState& far_field);

/// Physical components of grad-perp psi per cell, from vertex values.
struct StreamGradient {
    Field g1;  ///< d psi / d x2  (= a u1)
    Field g2;  ///< -d psi / d x1 (= a u2)
};
StreamGradient stream_gradient(const MappedGrid& grid, const Field& psi_vertices);

/// Face fluxes of grad-perp psi: exact vertex differences.
FaceFluxes stream_fluxes(const Field& psi_vertices);

struct Closure {
    FlowState state;
    Field weight;  ///< a with a u = grad-perp psi
    Field labels;
};

/// Pointwise closure of an iterate. Throws ChokedError (via the root solvers) when a
/// cell has no subsonic state.
Closure close_state(const Field& psi, const StreamProblem& problem);

/// Vorticity law evaluated at the pulled-back labels (azimuthal component on
/// axisymmetric grids).
Field vorticity_field(const FlowState& state, const Field& labels, const FarFieldState& far_field);

struct PicardStep {
    Field psi;
    Closure closure;  ///< closure of the returned iterate
    double theta = 0.0;
    double update = 0.0;  ///< L-infinity change of psi
    LinearSolveReport linear;
};

/// One relaxed step from `psi` (whose closure is `current`). The relaxation is halved
/// up to `max_halvings` times while the candidate has a choked cell.
PicardStep picard_step(const Field& psi, const Closure& current, const StreamProblem& problem,
                       const PicardConfig& config);

struct StreamSolution {
    Field psi;
    FlowState state;
    DerivedFields derived;
    Field labels;
    Field weight;
    FarFieldState far_field;
    GasModel gas;
    double m = 0.0;
    std::vector<double> history;  ///< relative L-infinity update per step
    int iterations = 0;
    BoundarySpec boundary;

    const MappedGrid& grid() const { return *state.grid; }
    Field psi_vertices() const { return vertex_values(grid(), boundary, psi); }
};

/// Run the Picard loop from the inlet profile extended in xi.
StreamSolution solve_stream(const StreamProblem& problem, const PicardConfig& config);

/// Problem 1: planar full Euler with upstream Bernoulli and entropy profiles.
StreamSolution solve_problem1(double m, double gamma, const UpstreamProfiles& upstream,
                              std::shared_ptr<const MappedGrid> grid, const PicardConfig& config = {});

/// Problem 2: axisymmetric homentropic flow.
StreamSolution solve_problem2(double m, double gamma, const UpstreamProfiles& upstream,
                              std::shared_ptr<const MappedGrid> grid, const PicardConfig& config = {});

/// Homogeneous incompressible limit (rho = 1). The `p` field holds the Bernoulli
/// head B_-(label) - |u|^2/2.
StreamSolution solve_incompressible_reference(double m, const UpstreamProfiles& upstream,
                                              std::shared_ptr<const MappedGrid> grid,
                                              const PicardConfig& config = {});

/// Cell-centred curl of the velocity by centred differences in mapped coordinates
/// (one-sided at the boundary).
Field discrete_curl(const FlowState& state);

/// Mass-flux face fluxes of a solution. Entropy is carried along discrete streamlines,
/// so each face flux is a difference of the inlet mass-flux function and sections
/// agree to round-off.
FaceFluxes mass_fluxes(const StreamSolution& solution);

/// Gas model matching a far field (incompressible maps to homentropic bookkeeping).
GasModel gas_of(const FarFieldState& far_field);

DerivedFields derive(const FlowState& state, const Field& labels, const FarFieldState& far_field);

}  // namespace nozzle
