#include "nozzle/limit_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace nozzle {

namespace {

double profile_b(double s) {
    const double t = 1.0 - s * s;
    return t > 0.0 ? t * t * t : 0.0;
}

double profile_db(double s) {
    const double t = 1.0 - s * s;
    return t > 0.0 ? -6.0 * s * t * t : 0.0;
}

double masked_integral(const Field& f, const MappedGrid& g, const Mask& core) {
    return core.select(f * g.measure(), 0.0).sum();
}

}  // namespace

double bump_moment(int n) {
    // 2^(2n+1) (n!)^2 / (2n+1)!
    double r = 2.0;
    for (int k = 1; k <= n; ++k) r *= 4.0 * k * k / ((2.0 * k) * (2.0 * k + 1.0));
    return r;
}

double Bump::value(double x, double y) const { return scale * profile_b((x - cx) / sx) * profile_b((y - cy) / sy); }

std::array<double, 2> Bump::gradient(double x, double y) const {
    const double u = (x - cx) / sx, v = (y - cy) / sy;
    return {scale * profile_db(u) / sx * profile_b(v), scale * profile_b(u) * profile_db(v) / sy};
}

double Bump::integral() const {
    const double i3 = bump_moment(3);
    return scale * sx * sy * i3 * i3;
}

TestFunctionFamily TestFunctionFamily::interior(const MappedGrid& grid, double core_fraction) {
    const double c = core_fraction * grid.half_length();
    const double i6 = bump_moment(6);
    TestFunctionFamily fam;
    for (double sx_rel : {0.16, 0.32, 0.48}) {
        const double sy_rel = sx_rel == 0.16 ? 0.15 : sx_rel == 0.32 ? 0.25 : 0.35;
        for (double cx_rel : {-0.48, -0.16, 0.16, 0.48}) {
            Bump b;
            b.cx = c * cx_rel;
            b.sx = c * sx_rel;
            // Narrowest gap between the walls over the x-support.
            double lower = -INFINITY, upper = INFINITY;
            for (int k = 0; k <= 64; ++k) {
                const WallProfile wp = wall_profiles(grid.geometry(), b.cx + b.sx * (k / 32.0 - 1.0));
                lower = std::max(lower, wp.lower);
                upper = std::min(upper, wp.upper);
            }
            b.cy = 0.5 * (lower + upper);
            b.sy = sy_rel * (upper - lower);
            b.scale = 1.0 / (std::sqrt(b.sx * b.sy) * i6);
            fam.bumps.push_back(b);
        }
    }
    return fam;
}

TestFunctionFamily TestFunctionFamily::wall(const MappedGrid& grid, std::vector<double> centers, double sx, double sy) {
    TestFunctionFamily fam;
    const double i3 = bump_moment(3);
    for (int side = 0; side < 2; ++side) {
        if (side == 0 && grid.axisymmetric()) continue;  // the axis is not a wall
        for (double x : centers) {
            const WallProfile wp = wall_profiles(grid.geometry(), x);
            Bump b;
            b.cx = x;
            b.cy = side == 0 ? wp.lower : wp.upper;
            b.sx = sx;
            b.sy = sy * wp.width();
            b.scale = 1.0 / (sx * i3);
            fam.bumps.push_back(b);
        }
    }
    return fam;
}

void validate_supports(const TestFunctionFamily& family, const MappedGrid& g) {
    const int nx = g.n_xi(), ne = g.n_eta();
    for (std::size_t k = 0; k < family.bumps.size(); ++k) {
        const Bump& b = family.bumps[k];
        for (int j = 0; j < ne; ++j) {
            for (int i = 0; i < nx; ++i) {
                const bool band = j < 2 || j >= ne - 2 || i < 2 || i >= nx - 2;
                if (!band) continue;
                // vertices of the band cell, not just its centre
                for (int dj = 0; dj <= 1; ++dj) {
                    for (int di = 0; di <= 1; ++di) {
                        const double xi = g.xi_face(i + di);
                        const Metric m = g.metric(xi, g.eta_face(j + dj));
                        if (b.value(m.x, m.y) != 0.0) {
                            throw HarnessInputError("test function " + std::to_string(k) +
                                                    " reaches within two cells of the boundary");
                        }
                    }
                }
            }
        }
    }
}

DiscreteTestFunction discretize(const Bump& bump, const MappedGrid& g) {
    const int nx = g.n_xi(), ne = g.n_eta();
    Field v(ne + 1, nx + 1);
    for (int jv = 0; jv <= ne; ++jv) {
        for (int iv = 0; iv <= nx; ++iv) {
            const Metric m = g.metric(g.xi_face(iv), g.eta_face(jv));
            v(jv, iv) = bump.value(m.x, m.y);
        }
    }
    DiscreteTestFunction d{Field(ne, nx), Field(ne, nx), Field(ne, nx)};
    for (int j = 0; j < ne; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double f_eta = (v(j + 1, i) + v(j + 1, i + 1) - v(j, i) - v(j, i + 1)) / (2.0 * g.d_eta());
            const double f_xi = (v(j, i + 1) + v(j + 1, i + 1) - v(j, i) - v(j + 1, i)) / (2.0 * g.d_xi());
            const double w = g.jacobian()(j, i), yx = g.y_xi()(j, i);
            d.dx(j, i) = f_xi - yx / w * f_eta;
            d.dy(j, i) = f_eta / w;
            d.value(j, i) = bump.value(g.x()(j, i), g.y()(j, i));
        }
    }
    return d;
}

double pairing(const Field& f1, const Field& f2, const DiscreteTestFunction& phi, const MappedGrid& g) {
    return ((f1 * phi.dx + f2 * phi.dy) * g.measure()).sum();
}

double weak_residual(const Field& f1, const Field& f2, const TestFunctionFamily& family, const MappedGrid& g,
                     const Field* source) {
    double worst = 0.0;
    for (const Bump& b : family.bumps) {
        const DiscreteTestFunction phi = discretize(b, g);
        double r = pairing(f1, f2, phi, g);
        if (source) r += (*source * phi.value * g.measure()).sum();
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double SystemResiduals::max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

SystemResiduals compressible_residuals(const StreamSolution& s, const TestFunctionFamily& fam) {
    const MappedGrid& g = s.grid();
    const FlowState& st = s.state;
    const Field r = g.axisymmetric() ? g.y() : g.constant(1.0);
    const Field ru1 = r * st.rho * st.u1, ru2 = r * st.rho * st.u2;
    SystemResiduals out;
    auto add = [&](const char* name, const Field& a, const Field& b, const Field* src = nullptr) {
        out.names.emplace_back(name);
        out.values.push_back(weak_residual(a, b, fam, g, src));
    };
    add("mass", ru1, ru2);
    add("momentum_1", ru1 * st.u1 + r * st.p, ru1 * st.u2);
    if (g.axisymmetric()) {
        add("momentum_2", ru1 * st.u2, ru2 * st.u2 + r * st.p, &st.p);
    } else {
        add("momentum_2", ru1 * st.u2, ru2 * st.u2 + st.p);
    }
    if (s.gas.kind == GasKind::FullEuler) {
        const Field e = s.derived.energy;
        add("energy", ru1 * e + st.u1 * st.p, ru2 * e + st.u2 * st.p);
    }
    return out;
}

SystemResiduals limit_residuals(const StreamSolution& s, const TestFunctionFamily& fam) {
    const MappedGrid& g = s.grid();
    const FlowState& st = s.state;
    const Field r = g.axisymmetric() ? g.y() : g.constant(1.0);
    SystemResiduals out;
    auto add = [&](const char* name, const Field& a, const Field& b, const Field* src = nullptr) {
        out.names.emplace_back(name);
        out.values.push_back(weak_residual(a, b, fam, g, src));
    };
    add("div_u", r * st.u1, r * st.u2);
    const bool full = s.gas.kind == GasKind::FullEuler;
    // The limit density is the transported entropy S (rho = S p^(1/gamma)).
    const Field rho = full ? s.derived.entropy : g.constant(1.0);
    if (full) add("mass", rho * st.u1, rho * st.u2);
    const Field ru1 = r * rho * st.u1, ru2 = r * rho * st.u2;
    add("momentum_1", ru1 * st.u1 + r * st.p, ru1 * st.u2);
    if (g.axisymmetric()) {
        add("momentum_2", ru1 * st.u2, ru2 * st.u2 + r * st.p, &st.p);
    } else {
        add("momentum_2", ru1 * st.u2, ru2 * st.u2 + st.p);
    }
    return out;
}

double incompressibility_functional(const StreamSolution& s, const TestFunctionFamily& fam) {
    const Field w1 = s.weight * s.state.u1, w2 = s.weight * s.state.u2;
    return weak_residual(w1, w2, fam, s.grid());
}

LqLaw lq_norm_law(const Field& p, double gamma, double q, const MappedGrid& g, const Mask& core, double rel_tol) {
    if (!(q >= 1.0)) throw std::domain_error("L^q law needs q >= 1");
    if ((core.select(p, 1.0) <= 0.0).any()) throw std::domain_error("L^q law needs positive pressure");
    const double area = core.select(g.measure(), 0.0).sum();
    LqLaw law;
    law.norm = std::pow(masked_integral(p.pow(q / gamma), g, core), 1.0 / q);
    law.gap = std::abs(law.norm - std::pow(area, 1.0 / q));
    law.jensen_lower = std::pow(area, 1.0 / q) * std::exp(masked_integral(p.log(), g, core) / (gamma * area));
    law.holder_upper = std::pow(masked_integral(p, g, core), 1.0 / gamma) * std::pow(area, 1.0 / q - 1.0 / gamma);
    law.chain_holds = law.jensen_lower <= law.norm * (1.0 + rel_tol);
    if (q <= gamma) law.chain_holds = law.chain_holds && law.norm <= law.holder_upper * (1.0 + rel_tol);
    return law;
}

std::vector<DivCurlPoint> divcurl_diagnostic(const std::vector<int>& ns, int cells) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double h = two_pi / cells;
    Bump phi{std::numbers::pi, std::numbers::pi, 0.5 * std::numbers::pi, 0.5 * std::numbers::pi, 1.0};
    std::vector<double> x(cells);
    for (int i = 0; i < cells; ++i) x[i] = (i + 0.5) * h;
    std::vector<DivCurlPoint> out;
    for (int n : ns) {
        if (n <= 0 || cells < 8 * n) {
            throw ResolutionError("n = " + std::to_string(n) + " needs at least " + std::to_string(8 * n) +
                                  " cells per axis, have " + std::to_string(cells));
        }
        // u = (0, s), w = (s, 0) for the compliant pair; u = w = (s, 0) for the violating one.
        double prod_c = 0.0, u2 = 0.0, w1 = 0.0, prod_v = 0.0, v1 = 0.0;
        for (int j = 0; j < cells; ++j) {
            for (int i = 0; i < cells; ++i) {
                const double f = phi.value(x[i], x[j]) * h * h;
                if (f == 0.0) continue;
                const double s = std::sin(n * x[i]);
                prod_c += (0.0 * s + s * 0.0) * f;
                u2 += s * f;
                w1 += s * f;
                prod_v += s * s * f;
                v1 += s * f;
            }
        }
        DivCurlPoint pt;
        pt.n = n;
        pt.compliant = std::abs(prod_c - (0.0 * w1 + u2 * 0.0));
        pt.violating = std::abs(prod_v - v1 * v1);
        pt.violating_limit = 0.5 * phi.integral();
        out.push_back(pt);
    }
    return out;
}

NormalTrace normal_trace(const Field& u1, const Field& u2, const MappedGrid& g, const TestFunctionFamily& fam) {
    const int nx = g.n_xi(), ne = g.n_eta();
    // Outward face fluxes of u per cell; faces use averages, boundary faces the adjacent cell.
    Field div(ne, nx);
    div.setZero();
    for (int j = 0; j < ne; ++j) {
        const double eta = g.eta_center(j);
        for (int i = 0; i <= nx; ++i) {
            const Metric m = g.metric(g.xi_face(i), eta);
            const int l = std::max(i - 1, 0), r = std::min(i, nx - 1);
            const double flux = m.w * 0.5 * (u1(j, l) + u1(j, r)) * g.d_eta();
            if (i > 0) div(j, i - 1) += flux;
            if (i < nx) div(j, i) -= flux;
        }
    }
    NormalTrace out;
    for (int j = 0; j <= ne; ++j) {
        const double eta = g.eta_face(j);
        for (int i = 0; i < nx; ++i) {
            const Metric m = g.metric(g.xi_center(i), eta);
            const int b = std::max(j - 1, 0), t = std::min(j, ne - 1);
            const double a1 = 0.5 * (u1(b, i) + u1(t, i)), a2 = 0.5 * (u2(b, i) + u2(t, i));
            const double flux = (a2 - m.y_xi * a1) * g.d_xi();
            if (j > 0) div(j - 1, i) += flux;
            if (j < ne) div(j, i) -= flux;
            const bool wall = j == ne || (j == 0 && !g.axisymmetric());
            if (wall) {
                out.wall_flux = std::max(out.wall_flux, std::abs(a2 - m.y_xi * a1) / std::sqrt(1.0 + m.y_xi * m.y_xi));
            }
        }
    }
    for (const Bump& b : fam.bumps) {
        const DiscreteTestFunction phi = discretize(b, g);
        const double v = pairing(u1, u2, phi, g) + (phi.value * div).sum();
        out.gauss_green = std::max(out.gauss_green, std::abs(v));
    }
    return out;
}

double convergence_rate(const std::vector<double>& gammas, const std::vector<double>& metric) {
    if (gammas.size() != metric.size()) throw FitError("series lengths differ");
    if (metric.size() < 3) throw FitError("rate fit needs at least 3 samples");
    const std::size_t n = metric.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(metric[k] > 0.0) || !(gammas[k] > 0.0)) throw FitError("rate fit needs positive samples");
        lx[k] = -std::log(gammas[k]);
        ly[k] = std::log(metric[k]);
        sx += lx[k];
        sy += ly[k];
    }
    sx /= n;
    sy /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (lx[k] - sx) * (lx[k] - sx);
        sxy += (lx[k] - sx) * (ly[k] - sy);
    }
    if (sxx == 0.0) throw FitError("rate fit needs distinct gamma values");
    return sxy / sxx;
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] < v[k - 1])) return false;
    }
    return true;
}

}  // namespace

ConditionReport check_framework_conditions(const std::vector<const StreamSolution*>& sols,
                                           const std::vector<double>& gammas, double mach_bar, const Mask& core) {
    if (sols.size() < 2 || sols.size() != gammas.size()) {
        throw HarnessInputError("framework conditions need at least two solutions, one per gamma");
    }
    ConditionReport rep;
    rep.mach_bar = mach_bar;
    std::vector<double> h_abs, f1_abs;
    for (std::size_t k = 0; k < sols.size(); ++k) {
        if (!sols[k]) throw HarnessInputError("missing solution fields");
        const StreamSolution& s = *sols[k];
        const MappedGrid& g = s.grid();
        const double gamma = gammas[k];
        rep.sup_mach.push_back(s.derived.mach.maxCoeff());
        rep.l1_speed2.push_back(masked_integral(s.state.u1.square() + s.state.u2.square(), g, core));
        rep.l1_pressure.push_back(masked_integral(s.state.p.abs(), g, core));
        rep.tv_vorticity.push_back(masked_integral(s.derived.vorticity.abs(), g, core));
        rep.h_value.push_back(masked_integral(s.derived.energy.log(), g, core) / gamma);
        rep.f1_value.push_back(masked_integral(s.state.p.log(), g, core) / gamma);
        if (k > 0) {
            rep.f2_increment.push_back(
                masked_integral((s.derived.entropy - sols[k - 1]->derived.entropy).abs(), g, core));
        }
        rep.sandwich.push_back(energy_sandwich(s.state, s.gas, mach_bar).holds);
        h_abs.push_back(std::abs(rep.h_value.back()));
        f1_abs.push_back(std::abs(rep.f1_value.back()));
    }
    rep.a1 = *std::max_element(rep.sup_mach.begin(), rep.sup_mach.end()) <= mach_bar;
    const double tv_max = *std::max_element(rep.tv_vorticity.begin(), rep.tv_vorticity.end());
    const double tv_min = *std::min_element(rep.tv_vorticity.begin(), rep.tv_vorticity.end());
    rep.tv_ratio = tv_max == 0.0 ? 1.0 : tv_max / tv_min;
    rep.h_decreasing = strictly_decreasing(h_abs);
    rep.f1_decreasing = strictly_decreasing(f1_abs);
    rep.h_reduction = h_abs.front() / h_abs.back();
    rep.f1_reduction = f1_abs.front() / f1_abs.back();
    rep.sandwich_all = std::all_of(rep.sandwich.begin(), rep.sandwich.end(), [](bool b) { return b; });
    return rep;
}

double velocity_distance(const FlowState& a, const FlowState& b, const Mask& core) {
    const Field d = (a.u1 - b.u1).square() + (a.u2 - b.u2).square();
    return std::sqrt(masked_integral(d, *a.grid, core));
}

SweepMetrics solution_metrics(const StreamSolution& s, const TestFunctionFamily& fam,
                              const TestFunctionFamily& wall_fam, const Mask& core) {
    const MappedGrid& g = s.grid();
    const double gamma = s.gas.gamma;
    SweepMetrics m;
    m.gamma = gamma;
    const Field dev = (s.state.p.pow(1.0 / gamma) - 1.0).abs();
    m.density_dev_l1 = masked_integral(dev, g, core);
    m.density_dev_linf = core.select(dev, 0.0).maxCoeff();
    const LqLaw l1 = lq_norm_law(s.state.p, gamma, 1.0, g, core);
    const LqLaw l2 = lq_norm_law(s.state.p, gamma, 2.0, g, core);
    m.lq_gap_1 = l1.gap;
    m.lq_gap_2 = l2.gap;
    m.jensen_1 = l1.chain_holds;
    m.jensen_2 = l2.chain_holds;
    m.compressible = compressible_residuals(s, fam);
    m.limit = limit_residuals(s, fam);
    m.compressible_residual = m.compressible.max();
    m.limit_residual = m.limit.max();
    m.limit_div_u = m.limit.values.front();
    m.incompressibility = incompressibility_functional(s, fam);
    const NormalTrace tr = normal_trace(s.state.u1, s.state.u2, g, wall_fam);
    m.normal_trace = tr.gauss_green;
    m.wall_flux = tr.wall_flux;
    m.rho_minus_s_l1 = masked_integral((s.state.rho - s.derived.entropy).abs(), g, core);
    m.sup_mach = s.derived.mach.maxCoeff();
    m.iterations = s.iterations;
    return m;
}

std::optional<double> SweepReport::rate(const std::string& metric) const {
    for (const SweepFit& f : fits) {
        if (f.metric == metric && f.valid) return f.rate;
    }
    return std::nullopt;
}

SweepReport gamma_sweep(const SweepSetup& setup) {
    const auto& gammas = setup.gammas;
    if (gammas.size() < 2) throw HarnessInputError("a sweep needs at least two gamma values");
    for (std::size_t k = 1; k < gammas.size(); ++k) {
        if (!(gammas[k] > gammas[k - 1])) throw HarnessInputError("gamma list must be strictly increasing");
    }
    const MappedGrid& g = *setup.grid;
    SweepReport rep;
    rep.gammas = gammas;
    rep.m = setup.m;
    rep.family = TestFunctionFamily::interior(g, setup.core_fraction);
    rep.wall_family = TestFunctionFamily::wall(g);
    validate_supports(rep.family, g);
    const Mask core = core_mask(g, setup.core_fraction);

    const std::size_t n = gammas.size();
    std::vector<std::optional<StreamSolution>> sols(n);
    std::vector<std::string> errors(n);
    std::optional<StreamSolution> reference;
    std::string reference_error;
    const bool want_ref = setup.reference && setup.problem == SweepProblem::Axisymmetric;

    // Slot n is the incompressible reference; each slot is written by exactly one worker.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k <= n; k = next++) {
            try {
                if (k == n) {
                    if (want_ref) reference = solve_incompressible_reference(setup.m, setup.upstream, setup.grid, setup.picard);
                } else if (setup.problem == SweepProblem::Axisymmetric) {
                    sols[k] = solve_problem2(setup.m, gammas[k], setup.upstream, setup.grid, setup.picard);
                } else {
                    sols[k] = solve_problem1(setup.m, gammas[k], setup.upstream, setup.grid, setup.picard);
                }
            } catch (const std::exception& e) {
                (k == n ? reference_error : errors[k]) = e.what();
            }
        }
    };
    const int threads = std::max(1, setup.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<const StreamSolution*> ok;
    std::vector<double> ok_gammas;
    for (std::size_t k = 0; k < n; ++k) {
        if (!sols[k]) {
            rep.failures.push_back("gamma " + std::to_string(gammas[k]) + ": " + errors[k]);
            continue;
        }
        SweepMetrics m = solution_metrics(*sols[k], rep.family, rep.wall_family, core);
        if (reference) m.reference_distance = velocity_distance(sols[k]->state, reference->state, core);
        rep.metrics.push_back(std::move(m));
        ok.push_back(&*sols[k]);
        ok_gammas.push_back(gammas[k]);
    }
    if (want_ref && !reference) rep.failures.push_back("incompressible reference: " + reference_error);
    if (ok.size() >= 2) rep.conditions = check_framework_conditions(ok, ok_gammas, setup.mach_bar, core);

    auto fit = [&](const std::string& name, auto get) {
        SweepFit f{name, 0.0, false};
        std::vector<double> series;
        for (const SweepMetrics& m : rep.metrics) series.push_back(get(m));
        try {
            f.rate = convergence_rate(ok_gammas, series);
            f.valid = true;
        } catch (const FitError&) {
        }
        rep.fits.push_back(f);
    };
    fit("density_dev_linf", [](const SweepMetrics& m) { return m.density_dev_linf; });
    fit("density_dev_l1", [](const SweepMetrics& m) { return m.density_dev_l1; });
    fit("lq_gap_1", [](const SweepMetrics& m) { return m.lq_gap_1; });
    fit("lq_gap_2", [](const SweepMetrics& m) { return m.lq_gap_2; });
    fit("limit_div_u", [](const SweepMetrics& m) { return m.limit_div_u; });
    if (setup.problem == SweepProblem::FullEuler2D) {
        fit("rho_minus_s_l1", [](const SweepMetrics& m) { return m.rho_minus_s_l1; });
    } else if (reference) {
        fit("reference_distance", [](const SweepMetrics& m) { return m.reference_distance; });
    }
    return rep;
}

}  // namespace nozzle
