#include "nozzle/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle {

namespace {

// s(x) = (1 + tanh x)/2 and its first two derivatives.
struct Step {
    double s, ds, dds;
};

Step tanh_step(double x) {
    const double t = std::tanh(x);
    const double sech2 = 1.0 - t * t;
    return {0.5 * (1.0 + t), 0.5 * sech2, -t * sech2};
}

}  // namespace

WallProfile wall_profiles(const NozzleGeometry& geometry, double x1) {
    const Step st = tanh_step(x1);
    WallProfile w;
    if (const auto* g = std::get_if<TanhNozzle2D>(&geometry)) {
        w.lower = g->a * st.s;
        w.d_lower = g->a * st.ds;
        w.dd_lower = g->a * st.dds;
        w.upper = 1.0 + (g->b - 1.0) * st.s;
        w.d_upper = (g->b - 1.0) * st.ds;
        w.dd_upper = (g->b - 1.0) * st.dds;
    } else {
        const auto& a = std::get<TanhNozzleAxisym>(geometry);
        w.upper = 1.0 + (a.r0 - 1.0) * st.s;
        w.d_upper = (a.r0 - 1.0) * st.ds;
        w.dd_upper = (a.r0 - 1.0) * st.dds;
    }
    return w;
}

double wall_curvature_bound(const NozzleGeometry& geometry) {
    const double step_bound = 2.0 / (3.0 * std::sqrt(3.0));
    if (const auto* g = std::get_if<TanhNozzle2D>(&geometry)) {
        return std::max(std::abs(g->a), std::abs(g->b - 1.0)) * step_bound;
    }
    return std::abs(std::get<TanhNozzleAxisym>(geometry).r0 - 1.0) * step_bound;
}

MappedGrid::MappedGrid(NozzleGeometry geometry, double half_length, int n_xi, int n_eta)
    : geometry_(std::move(geometry)),
      axisymmetric_(is_axisymmetric(geometry_)),
      half_length_(half_length),
      n_xi_(n_xi),
      n_eta_(n_eta) {
    if (!(half_length > 0.0)) throw GeometryError("truncation half-length must be positive");
    if (n_xi < 4 || n_eta < 4) throw GeometryError("grid needs at least 4 cells per direction");
    if (const auto* g = std::get_if<TanhNozzle2D>(&geometry_)) {
        if (g->a < 0.0 || !(g->b > g->a)) throw GeometryError("tanh nozzle needs a >= 0 and b > a");
    } else if (!(std::get<TanhNozzleAxisym>(geometry_).r0 > 0.0)) {
        throw GeometryError("axisymmetric nozzle needs r0 > 0");
    }
    d_xi_ = 2.0 * half_length / n_xi;
    d_eta_ = 1.0 / n_eta;

    x_.resize(n_eta, n_xi);
    y_.resize(n_eta, n_xi);
    jac_.resize(n_eta, n_xi);
    y_xi_.resize(n_eta, n_xi);
    for (int j = 0; j < n_eta; ++j) {
        for (int i = 0; i < n_xi; ++i) {
            const Metric m = cell_metric(i, j);
            if (!(m.w > 0.0)) {
                throw GeometryError("degenerate nozzle width at xi = " + std::to_string(m.x));
            }
            x_(j, i) = m.x;
            y_(j, i) = m.y;
            jac_(j, i) = m.w;
            y_xi_(j, i) = m.y_xi;
        }
    }
    measure_ = jac_ * (d_xi_ * d_eta_);
    flux_measure_ = axisymmetric_ ? Field(measure_ * y_) : measure_;
}

Metric MappedGrid::metric(double xi, double eta) const {
    const WallProfile wp = wall_profiles(geometry_, xi);
    Metric m;
    m.x = xi;
    m.w = wp.width();
    m.y = wp.lower + eta * m.w;
    m.y_xi = wp.d_lower + eta * wp.d_width();
    return m;
}

double MappedGrid::radial_weight(double xi, double eta) const {
    if (!axisymmetric_) return 1.0;
    return eta * wall_profiles(geometry_, xi).upper;
}

double domain_measure(const MappedGrid& grid) { return grid.measure().sum(); }

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
core_mask(const MappedGrid& grid, double fraction) {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mask(grid.n_eta(), grid.n_xi());
    const double lim = fraction * grid.half_length() + 1e-12 * grid.half_length();
    for (int j = 0; j < grid.n_eta(); ++j) {
        for (int i = 0; i < grid.n_xi(); ++i) mask(j, i) = std::abs(grid.xi_center(i)) <= lim;
    }
    return mask;
}

Field face_divergence(const FaceFluxes& f) {
    const Eigen::Index ne = f.eta_flux.rows() - 1;
    const Eigen::Index nx = f.xi_flux.cols() - 1;
    return f.xi_flux.rightCols(nx) - f.xi_flux.leftCols(nx) + f.eta_flux.bottomRows(ne) -
           f.eta_flux.topRows(ne);
}

double section_flux(const FlowState& state, const MappedGrid& grid, int section) {
    if (section < 0 || section > grid.n_xi()) throw std::out_of_range("section index out of range");
    const int left = std::max(section - 1, 0);
    const int right = std::min(section, grid.n_xi() - 1);
    const double xi = grid.xi_face(section);
    double flux = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        const double eta = grid.eta_center(j);
        const Metric m = grid.metric(xi, eta);
        const double mass = 0.5 * (state.rho(j, left) * state.u1(j, left) +
                                   state.rho(j, right) * state.u1(j, right));
        flux += mass * m.w * grid.d_eta() * grid.radial_weight(xi, eta);
    }
    return flux;
}

double section_flux(const FaceFluxes& fluxes, int section) {
    if (section < 0 || section >= fluxes.xi_flux.cols()) {
        throw std::out_of_range("section index out of range");
    }
    return fluxes.xi_flux.col(section).sum();
}

}  // namespace nozzle
