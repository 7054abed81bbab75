#pragma once

// Cell-centred finite volumes for  -div(k grad psi) = g  on the mapped grid.
//
// Face fluxes use the full metric tensor. The orthogonal two-point part forms a
// symmetric positive definite matrix; cross-derivative terms are evaluated from
// vertex values and handled by deferred correction around preconditioned CG.

#include "nozzle/core.hpp"
#include "nozzle/geometry.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace nozzle {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryKind {
    Dirichlet,
    Neumann,  ///< zero conormal flux
    Axis,     ///< psi = 0 on the symmetry axis, psi ~ r^2 nearby
};

struct SideCondition {
    BoundaryKind kind = BoundaryKind::Dirichlet;
    /// Boundary value as a function of the coordinate along the side
    /// (eta on inlet/outlet, xi on the walls).
    std::function<double(double)> value = [](double) { return 0.0; };

    static SideCondition dirichlet(std::function<double(double)> v) { return {BoundaryKind::Dirichlet, std::move(v)}; }
    static SideCondition constant(double c) {
        return {BoundaryKind::Dirichlet, [c](double) { return c; }};
    }
    static SideCondition neumann() { return {BoundaryKind::Neumann, [](double) { return 0.0; }}; }
    static SideCondition axis() { return {BoundaryKind::Axis, [](double) { return 0.0; }}; }
};

struct BoundarySpec {
    SideCondition inlet;   ///< xi = -L
    SideCondition outlet;  ///< xi = +L
    SideCondition lower;   ///< eta = 0
    SideCondition upper;   ///< eta = 1
};

struct EllipticProblem {
    std::shared_ptr<const MappedGrid> grid;
    Field coefficient;  ///< k > 0 per cell; faces use harmonic means
    Field source;       ///< g per unit planar area
    BoundarySpec boundary;
};

class AssemblyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LinearSolverError : public std::runtime_error {
public:
    LinearSolverError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Affine map from cell values (and boundary data) to vertex values:
///   psi_vertex = weights * psi_cell + offset,  vertex (iv, jv) stored at jv * (n_xi + 1) + iv.
struct VertexMap {
    SparseMatrix weights;
    Eigen::VectorXd offset;
};

VertexMap vertex_map(const MappedGrid& grid, const BoundarySpec& boundary);

/// Vertex values of a cell field, laid out (n_eta + 1) x (n_xi + 1).
Field vertex_values(const MappedGrid& grid, const BoundarySpec& boundary, const Field& cells);

struct LinearSystem {
    std::shared_ptr<const MappedGrid> grid;
    SparseMatrix matrix;  ///< symmetric two-point part
    SparseMatrix cross;   ///< non-orthogonal correction, applied explicitly
    Eigen::VectorXd rhs;
};

LinearSystem assemble(const EllipticProblem& problem);

struct LinearSolveOptions {
    double tolerance = 1e-10;  ///< relative residual of the full operator
    int max_iterations = 20000;
    int max_corrections = 200;
};

struct LinearSolveReport {
    int cg_iterations = 0;
    int corrections = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
};

/// Preconditioned CG (symmetric Gauss-Seidel) wrapped in deferred correction for
/// the cross terms. `initial` may be empty.
Field solve_linear(const LinearSystem& system, const LinearSolveOptions& options = {},
                   const Field& initial = Field(), LinearSolveReport* report = nullptr);

/// PCG with symmetric Gauss-Seidel on a symmetric positive definite matrix.
Eigen::VectorXd pcg_sgs(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                        double rel_tol, int max_iterations, int* iterations = nullptr,
                        std::vector<double>* history = nullptr);

struct ErrorNorms {
    double l2 = 0.0;
    double linf = 0.0;
};

/// Quadrature-weighted (planar cell measure) error norms.
ErrorNorms mms_error(const Field& exact, const Field& computed, const MappedGrid& grid);

/// Cell-centred field sampled from a function of physical coordinates.
Field sample(const MappedGrid& grid, const std::function<double(double, double)>& f);

}  // namespace nozzle
