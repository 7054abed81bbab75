#include "nozzle/nozzle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nozzle {

StreamProblem make_stream_problem(std::shared_ptr<const MappedGrid> grid, FarFieldState far_field) {
    if (grid->axisymmetric() != far_field.axisymmetric()) {
        throw std::invalid_argument("grid and far field disagree on axisymmetry");
    }
    StreamProblem p{std::move(grid), std::move(far_field), {}};
    const double top = p.far_field.stream_top();
    // The lambdas capture a copy of the far field so the spec stays valid on its own.
    auto ff = std::make_shared<const FarFieldState>(p.far_field);
    p.boundary.inlet = SideCondition::dirichlet([ff](double eta) { return ff->psi(eta); });
    p.boundary.outlet = SideCondition::neumann();
    p.boundary.lower = p.grid->axisymmetric() ? SideCondition::axis() : SideCondition::constant(0.0);
    p.boundary.upper = SideCondition::constant(top);
    return p;
}

Field streamline_pullback(const Field& psi, const FarFieldState& ff) {
    const double top = ff.stream_top();
    const double eps = 1e-6 * top;
    Field labels(psi.rows(), psi.cols());
    for (Eigen::Index j = 0; j < psi.rows(); ++j) {
        for (Eigen::Index i = 0; i < psi.cols(); ++i) {
            const double v = psi(j, i);
            if (!(v >= -eps && v <= top + eps)) {
                throw SolverStateError("stream function " + std::to_string(v) + " outside [0, " +
                                       std::to_string(top) + "] at cell (eta=" + std::to_string(j) +
                                       ", xi=" + std::to_string(i) + ")");
            }
            labels(j, i) = ff.psi_inverse(v);
        }
    }
    return labels;
}

StreamGradient stream_gradient(const MappedGrid& g, const Field& v) {
    const int nx = g.n_xi(), ne = g.n_eta();
    StreamGradient out{Field(ne, nx), Field(ne, nx)};
    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double psi_eta = (v(j + 1, i) + v(j + 1, i + 1) - v(j, i) - v(j, i + 1)) / (2.0 * g.d_eta());
            const double psi_xi = (v(j, i + 1) + v(j + 1, i + 1) - v(j, i) - v(j + 1, i)) / (2.0 * g.d_xi());
            const double w = g.jacobian()(j, i);
            const double yx = g.y_xi()(j, i);
            out.g1(j, i) = psi_eta / w;
            out.g2(j, i) = -(psi_xi - yx * psi_eta / w);
        }
    }
    return out;
}

FaceFluxes stream_fluxes(const Field& v) {
    const Eigen::Index ne = v.rows() - 1, nx = v.cols() - 1;
    FaceFluxes f{Field(ne, nx + 1), Field(ne + 1, nx)};
    f.xi_flux = v.bottomRows(ne) - v.topRows(ne);
    f.eta_flux = v.leftCols(nx) - v.rightCols(nx);
    return f;
}

GasModel gas_of(const FarFieldState& ff) {
    if (ff.kind() == FarFieldKind::FullEuler) return GasModel::full_euler(ff.gamma());
    return {GasKind::Homentropic, ff.kind() == FarFieldKind::Incompressible ? std::numeric_limits<double>::infinity()
                                                                            : ff.gamma()};
}

Closure close_state(const Field& psi, const StreamProblem& problem) {
    const MappedGrid& g = *problem.grid;
    const FarFieldState& ff = problem.far_field;
    const int nx = g.n_xi(), ne = g.n_eta();
    const Field v = vertex_values(g, problem.boundary, psi);
    const StreamGradient grad = stream_gradient(g, v);

    Closure c;
    c.labels = streamline_pullback(psi, ff);
    c.state.grid = problem.grid;
    c.state.rho.resize(ne, nx);
    c.state.p.resize(ne, nx);
    c.weight.resize(ne, nx);
    const double gamma = ff.gamma();
    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double r = g.axisymmetric() ? g.y()(j, i) : 1.0;
            const double phi2 = (grad.g1(j, i) * grad.g1(j, i) + grad.g2(j, i) * grad.g2(j, i)) / (r * r);
            const double t = c.labels(j, i);
            const double b = ff.upstream().b(t);
            double rho = 1.0, p = 0.0, a = 1.0;
            try {
                switch (ff.kind()) {
                    case FarFieldKind::FullEuler: {
                        const double s = ff.upstream().s(t);
                        p = subsonic_root_full(phi2, b, s, gamma);
                        a = std::pow(p, 1.0 / gamma);
                        rho = s * a;
                        break;
                    }
                    case FarFieldKind::Homentropic:
                        rho = subsonic_root_homentropic(phi2, b, gamma);
                        p = std::pow(rho, gamma);
                        a = rho;
                        break;
                    case FarFieldKind::Incompressible:
                        p = b - 0.5 * phi2;
                        break;
                }
            } catch (const ChokedError& e) {
                throw ChokedError("cell (eta=" + std::to_string(j) + ", xi=" + std::to_string(i) + "): " + e.what(),
                                  e.margin());
            }
            c.state.rho(j, i) = rho;
            c.state.p(j, i) = p;
            c.weight(j, i) = a * r;
        }
    }
    c.state.u1 = grad.g1 / c.weight;
    c.state.u2 = grad.g2 / c.weight;
    return c;
}

Field vorticity_field(const FlowState& state, const Field& labels, const FarFieldState& ff) {
    const MappedGrid& g = *state.grid;
    const double gamma = ff.gamma();
    Field omega(labels.rows(), labels.cols());
    const double a_inf = ff.density_weight();
    for (Eigen::Index j = 0; j < labels.rows(); ++j) {
        for (Eigen::Index i = 0; i < labels.cols(); ++i) {
            const double t = labels(j, i);
            const double db = ff.upstream().db(t);
            const double u_inf = ff.velocity(t);
            // Axisymmetric labels are upstream radii: d psi_- / dt carries a factor t.
            const double r = g.axisymmetric() ? g.y()(j, i) / std::max(t, 1e-12) : 1.0;
            switch (ff.kind()) {
                case FarFieldKind::FullEuler: {
                    const double p = state.p(j, i), rho = state.rho(j, i);
                    if (!(p > 0.0) || !(rho > 0.0)) throw ClosureDomainError("nonpositive p or rho", j, i, p);
                    const double ds = ff.upstream().ds(t);
                    omega(j, i) = -(std::pow(p, 1.0 / gamma) * db +
                                    gamma / (gamma - 1.0) * std::pow(p, (gamma + 2.0) / gamma) / (rho * rho) * ds) /
                                  (a_inf * u_inf);
                    break;
                }
                case FarFieldKind::Homentropic:
                    omega(j, i) = -r * state.rho(j, i) * db / (a_inf * u_inf);
                    break;
                case FarFieldKind::Incompressible:
                    omega(j, i) = -r * db / u_inf;
                    break;
            }
        }
    }
    return omega;
}

PicardStep picard_step(const Field& psi, const Closure& current, const StreamProblem& problem,
                       const PicardConfig& config) {
    if (!(config.relaxation >= 0.0 && config.relaxation <= 1.0)) {
        throw std::invalid_argument("relaxation must lie in [0, 1]");
    }
    PicardStep step;
    step.theta = config.relaxation;
    if (config.relaxation == 0.0) {
        step.psi = psi;
        step.closure = current;
        return step;
    }
    const Field omega = vorticity_field(current.state, current.labels, problem.far_field);
    EllipticProblem ep{problem.grid, current.weight.inverse(), omega, problem.boundary};
    const Field target = solve_linear(assemble(ep), config.linear, psi, &step.linear);

    double theta = config.relaxation;
    for (int h = 0;; ++h) {
        Field candidate = (1.0 - theta) * psi + theta * target;
        try {
            step.closure = close_state(candidate, problem);
            step.psi = std::move(candidate);
            step.theta = theta;
            step.update = (step.psi - psi).abs().maxCoeff();
            return step;
        } catch (const ChokedError& e) {
            if (h >= config.max_halvings) {
                throw SubsonicBreakdownError(std::string("subsonic closure lost; try a smaller mass flux: ") +
                                                 e.what(),
                                             -1, -1);
            }
            theta *= 0.5;
        }
    }
}

DerivedFields derive(const FlowState& state, const Field& labels, const FarFieldState& ff) {
    DerivedFields d;
    d.vorticity = vorticity_field(state, labels, ff);
    if (ff.kind() == FarFieldKind::Incompressible) {
        const Field q2 = state.u1.square() + state.u2.square();
        d.mach = Field::Zero(q2.rows(), q2.cols());
        d.bernoulli = state.p + 0.5 * q2;
        d.entropy = Field::Ones(q2.rows(), q2.cols());
        d.energy = 0.5 * q2;
        return d;
    }
    const GasModel gas = gas_of(ff);
    d.mach = mach_number(state, gas);
    d.bernoulli = bernoulli(state, gas);
    d.entropy = entropy(state, gas);
    d.energy = total_energy(state, gas);
    return d;
}

StreamSolution solve_stream(const StreamProblem& problem, const PicardConfig& config) {
    const MappedGrid& g = *problem.grid;
    const FarFieldState& ff = problem.far_field;
    const double top = ff.stream_top();

    Field psi(g.n_eta(), g.n_xi());
    for (int j = 0; j < g.n_eta(); ++j) psi.row(j).setConstant(ff.psi(g.eta_center(j)));
    Closure closure = close_state(psi, problem);

    std::vector<double> history;
    int it = 0;
    bool converged = false;
    while (it < config.max_outer) {
        PicardStep step = picard_step(psi, closure, problem, config);
        ++it;
        psi = std::move(step.psi);
        closure = std::move(step.closure);
        history.push_back(step.update / top);
        if (step.update < config.outer_tolerance * top) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NonConvergenceError("Picard iteration did not converge in " + std::to_string(config.max_outer) +
                                      " steps (last update " + std::to_string(history.back()) + ")",
                                  history);
    }

    StreamSolution s{psi,
                     closure.state,
                     derive(closure.state, closure.labels, ff),
                     closure.labels,
                     closure.weight,
                     ff,
                     gas_of(ff),
                     ff.mass_flux(),
                     std::move(history),
                     it,
                     problem.boundary};
    return s;
}

StreamSolution solve_problem1(double m, double gamma, const UpstreamProfiles& upstream,
                              std::shared_ptr<const MappedGrid> grid, const PicardConfig& config) {
    if (grid->axisymmetric()) throw std::invalid_argument("problem 1 needs a planar nozzle");
    return solve_stream(make_stream_problem(grid, far_field_full_euler(m, upstream, gamma)), config);
}

StreamSolution solve_problem2(double m, double gamma, const UpstreamProfiles& upstream,
                              std::shared_ptr<const MappedGrid> grid, const PicardConfig& config) {
    if (!grid->axisymmetric()) throw std::invalid_argument("problem 2 needs an axisymmetric nozzle");
    return solve_stream(make_stream_problem(grid, far_field_axisym(m, upstream, gamma)), config);
}

StreamSolution solve_incompressible_reference(double m, const UpstreamProfiles& upstream,
                                              std::shared_ptr<const MappedGrid> grid, const PicardConfig& config) {
    const bool axisym = grid->axisymmetric();
    return solve_stream(make_stream_problem(grid, far_field_incompressible(m, upstream, axisym)), config);
}

Field discrete_curl(const FlowState& state) {
    const MappedGrid& g = *state.grid;
    const int nx = g.n_xi(), ne = g.n_eta();
    auto d_xi = [&](const Field& f, int j, int i) {
        if (i == 0) return (f(j, 1) - f(j, 0)) / g.d_xi();
        if (i == nx - 1) return (f(j, i) - f(j, i - 1)) / g.d_xi();
        return (f(j, i + 1) - f(j, i - 1)) / (2.0 * g.d_xi());
    };
    auto d_eta = [&](const Field& f, int j, int i) {
        if (j == 0) return (f(1, i) - f(0, i)) / g.d_eta();
        if (j == ne - 1) return (f(j, i) - f(j - 1, i)) / g.d_eta();
        return (f(j + 1, i) - f(j - 1, i)) / (2.0 * g.d_eta());
    };
    Field curl(ne, nx);
    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double w = g.jacobian()(j, i), yx = g.y_xi()(j, i);
            const double du2_dx = d_xi(state.u2, j, i) - yx / w * d_eta(state.u2, j, i);
            const double du1_dy = d_eta(state.u1, j, i) / w;
            curl(j, i) = du2_dx - du1_dy;
        }
    }
    return curl;
}

FaceFluxes mass_fluxes(const StreamSolution& s) {
    const Field v = s.psi_vertices();
    Field carried(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
        for (Eigen::Index i = 0; i < v.cols(); ++i) {
            const double t = s.far_field.psi_inverse(v(j, i));
            carried(j, i) = s.far_field.cumulative_mass(t);
        }
    }
    return stream_fluxes(carried);
}

}  // namespace nozzle
