#include "nozzle/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace nozzle;

namespace {

double trapezoid_width(const TanhNozzle2D& g, double L, int n) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = -L + 2.0 * L * k / n;
        const double w = (1.0 + (g.b - 1.0) * 0.5 * (1 + std::tanh(x))) - g.a * 0.5 * (1 + std::tanh(x));
        s += (k == 0 || k == n ? 0.5 : 1.0) * w;
    }
    return s * 2.0 * L / n;
}

}  // namespace

TEST_CASE("tanh wall profiles") {
    const NozzleGeometry g = TanhNozzle2D{0.0, 2.0};
    CHECK(wall_profiles(g, 0.0).upper == doctest::Approx(1.5));
    const WallProfile far = wall_profiles(TanhNozzle2D{0.3, 1.7}, -20.0);
    CHECK(std::abs(far.lower) < 1e-8);
    CHECK(std::abs(far.upper - 1.0) < 1e-8);
    const WallProfile down = wall_profiles(TanhNozzle2D{0.3, 1.7}, 20.0);
    CHECK(down.lower == doctest::Approx(0.3));
    CHECK(down.upper == doctest::Approx(1.7));
    const WallProfile ax = wall_profiles(TanhNozzleAxisym{0.9}, 25.0);
    CHECK(ax.lower == 0.0);
    CHECK(ax.upper == doctest::Approx(0.9));
}

TEST_CASE("wall derivatives match finite differences and the curvature bound") {
    const NozzleGeometry g = TanhNozzle2D{0.2, 1.6};
    const double bound = wall_curvature_bound(g);
    double seen = 0.0;
    for (int k = 0; k <= 4000; ++k) {
        const double x = -10.0 + 20.0 * k / 4000;
        const double h = 1e-5;
        const WallProfile w = wall_profiles(g, x);
        const WallProfile wp = wall_profiles(g, x + h), wm = wall_profiles(g, x - h);
        CHECK(w.d_upper == doctest::Approx((wp.upper - wm.upper) / (2 * h)).epsilon(1e-7));
        CHECK(w.dd_lower == doctest::Approx((wp.d_lower - wm.d_lower) / (2 * h)).epsilon(1e-6));
        seen = std::max({seen, std::abs(w.dd_upper), std::abs(w.dd_lower)});
        CHECK(std::abs(w.dd_upper) <= bound * (1 + 1e-12));
    }
    // The closed-form bound is attained at the inflection points of tanh''.
    CHECK(seen == doctest::Approx(bound).epsilon(1e-4));
}

TEST_CASE("grid construction and domain measure") {
    const MappedGrid straight(TanhNozzle2D{0.0, 1.0}, 5.0, 16, 8);
    CHECK(domain_measure(straight) == doctest::Approx(10.0).epsilon(1e-14));
    const MappedGrid half(TanhNozzle2D{0.0, 1.0}, 2.5, 16, 8);
    CHECK(domain_measure(half) == doctest::Approx(5.0).epsilon(1e-14));

    const MappedGrid g(TanhNozzle2D{0.2, 1.2}, 10.0, 64, 16);
    for (int i = 0; i < g.n_xi(); ++i) {
        const WallProfile w = wall_profiles(g.geometry(), g.xi_center(i));
        CHECK(g.jacobian()(3, i) == doctest::Approx(w.width()).epsilon(1e-14));
    }
    CHECK((g.measure() > 0.0).all());
    CHECK(domain_measure(g) == doctest::Approx(trapezoid_width({0.2, 1.2}, 10.0, 200000)).epsilon(1e-6));

    CHECK_THROWS_AS(MappedGrid(TanhNozzle2D{0.5, 0.4}, 10.0, 8, 8), GeometryError);
    CHECK_THROWS_AS(MappedGrid(TanhNozzle2D{0.0, 1.0}, 10.0, 3, 8), GeometryError);
    CHECK_THROWS_AS(MappedGrid(TanhNozzleAxisym{-1.0}, 10.0, 8, 8), GeometryError);
}

TEST_CASE("measure converges at second order") {
    const TanhNozzle2D geo{0.2, 1.2};
    const double exact = trapezoid_width(geo, 3.0, 400000);
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
        const double err = std::abs(domain_measure(MappedGrid(geo, 3.0, n, 4)) - exact);
        if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("axisymmetric flux measure is r-weighted") {
    const MappedGrid g(TanhNozzleAxisym{1.0}, 1.0, 8, 32);
    CHECK(domain_measure(g) == doctest::Approx(2.0));
    // integral of r over the unit cylinder section times length 2
    CHECK(g.flux_measure().sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("section fluxes") {
    auto g = std::make_shared<const MappedGrid>(TanhNozzle2D{0.0, 1.0}, 2.0, 12, 6);
    FlowState s{g->constant(1.0), g->constant(1.0), g->zeros(), g->constant(1.0), g};
    for (int i = 0; i <= g->n_xi(); ++i) CHECK(section_flux(s, *g, i) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(section_flux(s, *g, 13), std::out_of_range);

    // Fluxes from vertex differences of any vertex field telescope.
    const int nx = 12, ne = 6;
    Field v(ne + 1, nx + 1);
    for (int j = 0; j <= ne; ++j)
        for (int i = 0; i <= nx; ++i) v(j, i) = std::sin(0.3 * i + j) + j * j;
    FaceFluxes f{Field(ne, nx + 1), Field(ne + 1, nx)};
    for (int j = 0; j < ne; ++j)
        for (int i = 0; i <= nx; ++i) f.xi_flux(j, i) = v(j + 1, i) - v(j, i);
    for (int j = 0; j <= ne; ++j)
        for (int i = 0; i < nx; ++i) f.eta_flux(j, i) = v(j, i) - v(j, i + 1);
    CHECK(face_divergence(f).abs().maxCoeff() < 1e-13);
    // Sections differ by the wall fluxes, so take equal wall values.
    for (int i = 0; i <= nx; ++i) v(0, i) = 0.0, v(ne, i) = 5.0;
    for (int j = 0; j < ne; ++j)
        for (int i = 0; i <= nx; ++i) f.xi_flux(j, i) = v(j + 1, i) - v(j, i);
    for (int i = 0; i <= nx; ++i) CHECK(section_flux(f, i) == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("core mask") {
    const MappedGrid g(TanhNozzle2D{0.0, 1.0}, 10.0, 40, 4);
    const auto m = core_mask(g, 0.5);
    CHECK(m.count() == 20 * 4);
}
