#pragma once

// Nozzle walls, truncation to [-L, L] and the wall-following mapped grid
//   x1 = xi,   x2 = f1(xi) + eta (f2(xi) - f1(xi)),   eta in [0, 1].
// The axisymmetric nozzle uses f1 = 0 (the axis) and f2 = f, so r = eta f(xi).

#include "nozzle/core.hpp"

#include <stdexcept>
#include <variant>

namespace nozzle {

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// f1 = a (1 + tanh x)/2,  f2 = 1 + (b - 1)(1 + tanh x)/2.
struct TanhNozzle2D {
    double a = 0.0;
    double b = 1.0;
};

/// f = 1 + (r0 - 1)(1 + tanh x)/2.
struct TanhNozzleAxisym {
    double r0 = 1.0;
};

using NozzleGeometry = std::variant<TanhNozzle2D, TanhNozzleAxisym>;

inline bool is_axisymmetric(const NozzleGeometry& g) {
    return std::holds_alternative<TanhNozzleAxisym>(g);
}

struct WallProfile {
    double lower = 0.0;
    double upper = 1.0;
    double d_lower = 0.0;
    double d_upper = 0.0;
    double dd_lower = 0.0;
    double dd_upper = 0.0;

    double width() const { return upper - lower; }
    double d_width() const { return d_upper - d_lower; }
};

/// Wall ordinates and their analytic first and second derivatives at x1.
WallProfile wall_profiles(const NozzleGeometry& geometry, double x1);

/// Analytic bound of |f''| for the tanh family: max |d^2/dx^2 (1+tanh x)/2| = 2/(3 sqrt 3).
double wall_curvature_bound(const NozzleGeometry& geometry);

/// Local metric of the mapping at a parameter point.
struct Metric {
    double x = 0.0;
    double y = 0.0;     ///< x2, or r for axisymmetric grids
    double w = 1.0;     ///< Jacobian d(x,y)/d(xi,eta) = f2 - f1
    double y_xi = 0.0;  ///< dy/dxi at fixed eta

    /// J grad(xi) . grad(xi), J grad(xi) . grad(eta), J grad(eta) . grad(eta)
    double g11() const { return w; }
    double g12() const { return -y_xi; }
    double g22() const { return (1.0 + y_xi * y_xi) / w; }
};

class MappedGrid {
public:
    MappedGrid(NozzleGeometry geometry, double half_length, int n_xi, int n_eta);

    const NozzleGeometry& geometry() const { return geometry_; }
    bool axisymmetric() const { return axisymmetric_; }
    double half_length() const { return half_length_; }
    int n_xi() const { return n_xi_; }
    int n_eta() const { return n_eta_; }
    double d_xi() const { return d_xi_; }
    double d_eta() const { return d_eta_; }

    double xi_center(int i) const { return -half_length_ + (i + 0.5) * d_xi_; }
    double eta_center(int j) const { return (j + 0.5) * d_eta_; }
    double xi_face(int i) const { return -half_length_ + i * d_xi_; }
    double eta_face(int j) const { return j * d_eta_; }

    Metric metric(double xi, double eta) const;
    Metric cell_metric(int i, int j) const { return metric(xi_center(i), eta_center(j)); }

    /// Cell centre coordinates.
    const Field& x() const { return x_; }
    const Field& y() const { return y_; }
    const Field& jacobian() const { return jac_; }
    const Field& y_xi() const { return y_xi_; }
    /// Planar (x, y) cell measure: J d_xi d_eta.
    const Field& measure() const { return measure_; }
    /// Physical flux measure: r-weighted for axisymmetric grids, planar otherwise.
    const Field& flux_measure() const { return flux_measure_; }

    /// Radius at a parameter point (axisymmetric), 1 for planar grids.
    double radial_weight(double xi, double eta) const;

    Field zeros() const { return Field::Zero(n_eta_, n_xi_); }
    Field constant(double c) const { return Field::Constant(n_eta_, n_xi_, c); }

private:
    NozzleGeometry geometry_;
    bool axisymmetric_ = false;
    double half_length_;
    int n_xi_;
    int n_eta_;
    double d_xi_;
    double d_eta_;
    Field x_, y_, jac_, y_xi_, measure_, flux_measure_;
};

/// Planar measure of the truncated domain (sum of cell measures).
double domain_measure(const MappedGrid& grid);

/// Cells whose centres satisfy |xi| <= fraction * L.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
core_mask(const MappedGrid& grid, double fraction);

/// Contravariant face fluxes of a discrete vector field: xi_flux(j, i) crosses the
/// xi-face i (i = 0..n_xi), eta_flux(j, i) crosses the eta-face j (j = 0..n_eta).
struct FaceFluxes {
    Field xi_flux;   ///< n_eta x (n_xi + 1)
    Field eta_flux;  ///< (n_eta + 1) x n_xi
};

/// Discrete divergence (sum of outgoing face fluxes) per cell.
Field face_divergence(const FaceFluxes& fluxes);

/// Mass flux of rho u across the xi-face line `section` (0..n_xi), using face
/// averages of the cell values; r-weighted on axisymmetric grids.
double section_flux(const FlowState& state, const MappedGrid& grid, int section);

/// Flux across a face line from face fluxes; telescopes exactly for divergence-free fields.
double section_flux(const FaceFluxes& fluxes, int section);

}  // namespace nozzle
