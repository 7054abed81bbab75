#include "nozzle/limit_harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace nozzle;

namespace {

using Grid = std::shared_ptr<const MappedGrid>;

std::vector<double> powers(const std::vector<double>& g, double c, double k) {
    std::vector<double> out;
    for (double x : g) out.push_back(c * std::pow(x, -k));
    return out;
}

}  // namespace

TEST_CASE("power-law fits") {
    const std::vector<double> g{5, 10, 20, 40, 80};
    CHECK(convergence_rate(g, powers(g, 3.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(convergence_rate(g, powers(g, 0.2, 2.0)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(convergence_rate(g, powers(g, 0.7, 0.0))) < 1e-12);
    CHECK_THROWS_AS(convergence_rate(g, {1, 2, 0, 4, 5}), FitError);
    CHECK_THROWS_AS(convergence_rate({5, 10}, {1, 2}), FitError);
    CHECK_THROWS_AS(convergence_rate({5, 5, 5}, {1, 2, 3}), FitError);
}

TEST_CASE("bump functions") {
    // int_{-1}^{1} (1 - s^2)^3 ds = 32/35
    CHECK(bump_moment(3) == doctest::Approx(32.0 / 35.0).epsilon(1e-14));
    const Bump b{0.5, 0.25, 2.0, 0.5, 3.0};
    CHECK(b.value(0.5, 0.25) == doctest::Approx(3.0));
    CHECK(b.value(2.6, 0.25) == 0.0);
    CHECK(b.integral() == doctest::Approx(3.0 * 2.0 * 0.5 * std::pow(32.0 / 35.0, 2)).epsilon(1e-14));
    const double h = 1e-6;
    const auto gr = b.gradient(0.9, 0.4);
    CHECK(gr[0] == doctest::Approx((b.value(0.9 + h, 0.4) - b.value(0.9 - h, 0.4)) / (2 * h)).epsilon(1e-6));
    CHECK(gr[1] == doctest::Approx((b.value(0.9, 0.4 + h) - b.value(0.9, 0.4 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("test-function families") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.1, 1.2}, 10.0, 128, 64);
    const TestFunctionFamily fam = TestFunctionFamily::interior(*g);
    CHECK(fam.bumps.size() == 12);
    CHECK_NOTHROW(validate_supports(fam, *g));
    TestFunctionFamily bad = fam;
    bad.bumps[0].cy = 0.05;
    CHECK_THROWS_AS(validate_supports(bad, *g), HarnessInputError);

    // Interior bumps have unit L2 norm.
    for (const Bump& b : fam.bumps) {
        const DiscreteTestFunction phi = discretize(b, *g);
        CHECK((phi.value.square() * g->measure()).sum() == doctest::Approx(1.0).epsilon(2e-2));
    }
}

TEST_CASE("weak residuals") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.1, 1.2}, 10.0, 128, 64);
    const TestFunctionFamily fam = TestFunctionFamily::interior(*g);
    // Constant fluxes pair to zero up to quadrature error.
    Grid coarse = std::make_shared<MappedGrid>(TanhNozzle2D{0.1, 1.2}, 10.0, 64, 32);
    const double rc = weak_residual(coarse->constant(2.0), coarse->constant(-0.5),
                                    TestFunctionFamily::interior(*coarse), *coarse);
    const double rf = weak_residual(g->constant(2.0), g->constant(-0.5), fam, *g);
    CHECK(rf < 1e-3);
    CHECK(rc / rf > 3.0);

    // div F = s for F = (x, 0), s = 1.
    const Field one = g->constant(1.0);
    CHECK(weak_residual(g->x(), g->zeros(), fam, *g, &one) < 1e-3);

    // Oscillating fluxes converge weakly to zero.
    double last = INFINITY;
    for (double k : {4.0, 16.0, 64.0}) {
        const Field f = (k * g->x()).sin();
        const double r = weak_residual(f, g->zeros(), fam, *g);
        CHECK(r < last);
        last = r;
    }
    CHECK(last < 0.1);
}

TEST_CASE("L^q norm law") {
    const MappedGrid g(TanhNozzle2D{0.0, 1.0}, 2.0, 32, 8);
    const Mask core = core_mask(g, 0.5);
    const LqLaw law = lq_norm_law(g.constant(1.0), 7.0, 2.0, g, core);
    CHECK(law.norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(law.gap < 1e-14);
    CHECK(law.chain_holds);

    // p = 2^gamma in half of the core, 1 elsewhere: the q = 1 norm is 1.5 |core|.
    Field p = g.constant(1.0);
    p.leftCols(16) = std::pow(2.0, 3.0);
    const LqLaw half = lq_norm_law(p, 3.0, 1.0, g, core);
    CHECK(half.norm == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(half.gap == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(half.jensen_lower <= half.norm);
    CHECK(half.chain_holds);
}

TEST_CASE("div-curl commutation") {
    const std::vector<DivCurlPoint> pts = divcurl_diagnostic({8, 16, 32, 64}, 1024);
    REQUIRE(pts.size() == 4);
    for (const DivCurlPoint& p : pts) CHECK(std::abs(p.compliant) <= 1e-10);
    CHECK(std::abs(pts.back().violating - pts.back().violating_limit) <= 1e-2);
    CHECK(std::abs(pts.back().violating_limit) > 0.1);
    CHECK_THROWS_AS(divcurl_diagnostic({64}, 256), ResolutionError);
}

TEST_CASE("normal traces") {
    const MappedGrid g(TanhNozzle2D{0.0, 1.0}, 10.0, 128, 32);
    const TestFunctionFamily walls = TestFunctionFamily::wall(g);
    CHECK(walls.bumps.size() == 6);
    const NormalTrace along = normal_trace(g.constant(1.0), g.zeros(), g, walls);
    CHECK(along.gauss_green < 1e-13);
    CHECK(along.wall_flux == 0.0);
    const NormalTrace across = normal_trace(g.zeros(), g.constant(1.0), g, walls);
    CHECK(across.gauss_green == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(across.wall_flux == doctest::Approx(1.0));
}

TEST_CASE("solutions: incompressibility and framework conditions") {
    Grid g = std::make_shared<MappedGrid>(TanhNozzle2D{0.0, 1.0}, 10.0, 64, 16);
    const UpstreamProfiles up = make_upstream(ConstantProfile{2.0}, ConstantProfile{1.0});
    const StreamSolution a = solve_problem1(0.4, 3.0, up, g);
    const StreamSolution b = solve_problem1(0.4, 6.0, up, g);
    const TestFunctionFamily fam = TestFunctionFamily::interior(*g);
    CHECK(incompressibility_functional(a, fam) <= 1e-9);
    CHECK(compressible_residuals(a, fam).max() < 1e-10);

    const Mask core = core_mask(*g, 0.5);
    const ConditionReport rep = check_framework_conditions({&a, &b}, {3.0, 6.0}, 1.0, core);
    CHECK(rep.a1);
    CHECK(rep.sandwich_all);
    CHECK(rep.sup_mach.size() == 2);
    CHECK(rep.tv_vorticity[0] < 1e-10);
    CHECK_THROWS_AS(check_framework_conditions({&a}, {3.0}, 1.0, core), HarnessInputError);

    const SweepMetrics sm = solution_metrics(a, fam, TestFunctionFamily::wall(*g), core);
    CHECK(sm.normal_trace < 1e-12);
    CHECK(sm.density_dev_linf == doctest::Approx(std::abs(std::pow(a.far_field.level(), 1.0 / 3.0) - 1.0)).epsilon(1e-10));
}
