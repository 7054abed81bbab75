#include "nozzle/nozzle_solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace nozzle;

namespace {

using Grid = std::shared_ptr<const MappedGrid>;

Field inlet_extension(const MappedGrid& g, const FarFieldState& ff) {
    Field psi(g.n_eta(), g.n_xi());
    for (int j = 0; j < g.n_eta(); ++j) psi.row(j).setConstant(ff.psi(g.eta_center(j)));
    return psi;
}

}  // namespace

TEST_CASE("uniform flow in a straight channel is a fixed point") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.0, 1.0}, 4.0, 32, 12);
    const UpstreamProfiles up = make_upstream(ConstantProfile{2.0}, ConstantProfile{1.0});
    const StreamSolution s = solve_problem1(0.3, 2.0, up, g);
    const double u = s.far_field.velocity(0.5);
    CHECK((s.state.u1 - u).abs().maxCoeff() < 1e-10);
    CHECK(s.state.u2.abs().maxCoeff() < 1e-10);
    CHECK((s.state.p - s.far_field.level()).abs().maxCoeff() < 1e-10);
    CHECK(s.iterations <= 2);
    CHECK(s.derived.vorticity.abs().maxCoeff() == 0.0);
}

TEST_CASE("zero relaxation leaves the iterate unchanged") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.1, 1.2}, 4.0, 32, 12);
    const UpstreamProfiles up = make_upstream(BumpProfile{2.0, 0.05, BumpShape::Parabola}, ConstantProfile{1.0});
    const StreamProblem prob = make_stream_problem(g, far_field_full_euler(0.3, up, 3.0));
    const Field psi = inlet_extension(*g, prob.far_field);
    const Closure c = close_state(psi, prob);
    PicardConfig cfg;
    cfg.relaxation = 0.0;
    const PicardStep step = picard_step(psi, c, prob, cfg);
    CHECK((step.psi - psi).abs().maxCoeff() == 0.0);
    cfg.relaxation = 1.5;
    CHECK_THROWS_AS(picard_step(psi, c, prob, cfg), std::invalid_argument);
}

TEST_CASE("streamline pullback") {
    const UpstreamProfiles up = make_upstream(BumpProfile{2.0, 0.05, BumpShape::Parabola}, ConstantProfile{1.0});
    const FarFieldState ff = far_field_full_euler(0.3, up, 3.0);
    Field psi(1, 4);
    psi << 0.0, ff.psi(0.25), ff.psi(0.8), ff.stream_top();
    const Field t = streamline_pullback(psi, ff);
    CHECK(t(0, 0) == 0.0);
    CHECK(t(0, 1) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(t(0, 2) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(t(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
    psi(0, 1) = 2.0 * ff.stream_top();
    CHECK_THROWS_AS(streamline_pullback(psi, ff), SolverStateError);
}

TEST_CASE("vorticity law") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.0, 1.0}, 1.0, 4, 4);
    FlowState s{g->constant(1.0), g->constant(1.0), g->zeros(), g->constant(1.0), g};
    const Field labels = g->constant(0.5);

    const FarFieldState flat(FarFieldKind::FullEuler, 2.0, false, 1.0,
                             make_upstream(ConstantProfile{2.5}, ConstantProfile{1.0}));
    CHECK(vorticity_field(s, labels, flat).abs().maxCoeff() == 0.0);

    // B = 2 + t, S = 1, gamma = 2 at level p = 1: u(1/2) = sqrt(2 (2.5 - 2)) = 1, so omega = -B' = -1.
    const FarFieldState sheared(FarFieldKind::FullEuler, 2.0, false, 1.0,
                                make_upstream(PolynomialProfile{{2.0, 1.0}}, ConstantProfile{1.0}));
    CHECK(sheared.velocity(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    const Field w = vorticity_field(s, labels, sheared);
    CHECK((w + 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("problem 1 converges in a converging-diverging channel") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.1, 1.2}, 8.0, 64, 24);
    const UpstreamProfiles up = make_upstream(BumpProfile{2.0, 0.05, BumpShape::Parabola}, PolynomialProfile{{1.0, 0.05}});
    const double m = 0.6 * choking_flux(FarFieldKind::FullEuler, up, 3.0, false);
    const StreamSolution s = solve_problem1(m, 3.0, up, g);
    REQUIRE(!s.history.empty());
    CHECK(s.history.back() < 1e-8);
    CHECK(s.history.back() < s.history.front());
    CHECK(s.iterations <= 200);
    CHECK(s.derived.mach.maxCoeff() < 1.0);
    CHECK((s.state.u1 > 0.0).all());
    const FaceFluxes f = mass_fluxes(s);
    CHECK(face_divergence(f).abs().maxCoeff() < 1e-12);
    for (int i = 0; i <= g->n_xi(); i += 8) CHECK(section_flux(f, i) == doctest::Approx(m).epsilon(1e-10));
}

TEST_CASE("straight channel carries the inlet profile unchanged") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.0, 1.0}, 6.0, 48, 24);
    const UpstreamProfiles up = make_upstream(BumpProfile{2.0, 0.05, BumpShape::Parabola}, ConstantProfile{1.0});
    const StreamSolution s = solve_problem1(0.5, 3.0, up, g);
    for (int j = 0; j < g->n_eta(); ++j) {
        const double t = g->eta_center(j);
        CHECK(s.state.u1(j, g->n_xi() - 1) == doctest::Approx(s.far_field.velocity(t)).epsilon(1e-2));
        CHECK(s.labels(j, g->n_xi() / 2) == doctest::Approx(t).epsilon(1e-2));
    }
}

TEST_CASE("axisymmetric flow in a cylinder") {
    const UpstreamProfiles up = make_upstream(ConstantProfile{3.0});
    const double m = 0.5 * choking_flux(FarFieldKind::Homentropic, up, 2.0, true);
    std::vector<double> err;
    for (int n : {16, 32}) {
        Grid g = std::make_shared<MappedGrid>(TanhNozzleAxisym{1.0}, 4.0, 2 * n, n);
        const StreamSolution s = solve_problem2(m, 2.0, up, g);
        const double u = s.far_field.velocity(0.5);
        CHECK((s.state.u1 > 0.0).all());
        err.push_back(std::max((s.state.u1 - u).abs().maxCoeff(), s.state.u2.abs().maxCoeff()) / u);
    }
    // The wall cell sees k at its centre, an O(h) flux error in the max norm.
    CHECK(err[0] < 1e-2);
    CHECK(err[0] / err[1] > 1.8);
}

TEST_CASE("axisymmetric flow through a contraction") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzleAxisym{0.9}, 6.0, 48, 20);
    const UpstreamProfiles up = make_upstream(BumpProfile{4.0, 0.2, BumpShape::Cosine});
    const StreamSolution s = solve_problem2(0.7, 5.0, up, g);
    CHECK((s.state.u1 > 0.0).all());
    CHECK(s.derived.mach.maxCoeff() < 1.0);
    // The radial velocity vanishes on the axis: it is O(r) in the first row.
    const double near = s.state.u2.row(0).abs().maxCoeff();
    const double mid = s.state.u2.row(g->n_eta() / 2).abs().maxCoeff();
    CHECK(near < 0.2 * mid);
    const FaceFluxes f = mass_fluxes(s);
    for (int i = 0; i <= g->n_xi(); i += 12) CHECK(section_flux(f, i) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("incompressible reference") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.0, 2.0}, 6.0, 48, 16);
    const UpstreamProfiles up = make_upstream(ConstantProfile{2.0});
    const StreamSolution s = solve_incompressible_reference(0.5, up, g);
    // Far downstream the width is 2.
    CHECK(s.state.u1(8, g->n_xi() - 1) == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(s.state.u1(8, 0) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK((s.state.rho - 1.0).abs().maxCoeff() == 0.0);
    const FaceFluxes f = stream_fluxes(s.psi_vertices());
    CHECK(face_divergence(f).abs().maxCoeff() < 1e-13);
    CHECK(section_flux(f, 17) == doctest::Approx(0.5).epsilon(1e-12));
}
