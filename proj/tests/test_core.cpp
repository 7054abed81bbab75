#include "nozzle/core.hpp"
#include "nozzle/profiles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nozzle;

namespace {

FlowState uniform(double rho, double u1, double u2, double p) {
    FlowState s;
    s.rho = Field::Constant(2, 3, rho);
    s.u1 = Field::Constant(2, 3, u1);
    s.u2 = Field::Constant(2, 3, u2);
    s.p = Field::Constant(2, 3, p);
    return s;
}

}  // namespace

TEST_CASE("gas model rejects gamma <= 1") {
    CHECK_THROWS_WITH(GasModel::full_euler(1.0), "gamma must exceed 1");
    CHECK_THROWS(GasModel::homentropic(0.5));
    CHECK(GasModel::homentropic(2.0).gamma == 2.0);
}

TEST_CASE("mach number closed forms") {
    const GasModel fe = GasModel::full_euler(2.0);
    CHECK(mach_number(uniform(1, 0, 0, 1), fe)(0, 0) == 0.0);
    CHECK(mach_number(uniform(1, 1, 1, 1), fe)(1, 2) == doctest::Approx(1.0).epsilon(1e-15));
    const GasModel he = GasModel::homentropic(3.0);
    CHECK(mach_number(uniform(1, std::sqrt(3.0), 0, 1), he)(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bernoulli, energy and entropy closed forms") {
    const GasModel fe = GasModel::full_euler(2.0);
    const FlowState rest = uniform(1, 0, 0, 1);
    CHECK(bernoulli(rest, fe)(0, 0) == doctest::Approx(2.0));
    CHECK(total_energy(rest, fe)(0, 0) == doctest::Approx(1.0));

    const GasModel he = GasModel::homentropic(2.0);
    CHECK(bernoulli(uniform(2, 2, 0, 4), he)(0, 0) == doctest::Approx(6.0));
    for (double g : {1.4, 3.0, 17.0}) {
        CHECK(bernoulli(uniform(1, 0, 0, 1), GasModel::homentropic(g))(0, 0) == doctest::Approx(g / (g - 1)));
    }

    CHECK(entropy(uniform(1, 0, 0, 1), GasModel::full_euler(1.7))(0, 0) == doctest::Approx(1.0));
    CHECK(entropy(uniform(2, 0, 0, 1), GasModel::full_euler(9.0))(0, 0) == doctest::Approx(2.0));
    CHECK(entropy(uniform(2, 0, 0, 16), GasModel::full_euler(4.0))(0, 0) == doctest::Approx(1.0));
    CHECK(entropy(uniform(2, 0, 0, 16), GasModel::homentropic(4.0))(1, 1) == 1.0);
}

TEST_CASE("closure domain errors name the offending cell") {
    FlowState s = uniform(1, 0.1, 0, 1);
    s.p(1, 2) = 0.0;
    try {
        mach_number(s, GasModel::full_euler(2.0));
        FAIL("expected ClosureDomainError");
    } catch (const ClosureDomainError& e) {
        CHECK(e.row() == 1);
        CHECK(e.col() == 2);
        CHECK(e.value() == 0.0);
    }
    FlowState r = uniform(1, 0, 0, 1);
    r.rho(0, 1) = -1.0;
    CHECK_THROWS_AS(bernoulli(r, GasModel::full_euler(2.0)), ClosureDomainError);
}

TEST_CASE("M = |u|/c and B - E = p/rho on random states") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(0.05, 5.0), vel(-3.0, 3.0), gam(1.05, 50.0);
    for (int k = 0; k < 500; ++k) {
        const double rho = pos(rng), p = pos(rng), u = vel(rng), v = vel(rng), g = gam(rng);
        const FlowState s = uniform(rho, u, v, p);
        const long double q = std::sqrt((long double)u * u + (long double)v * v);
        const long double c_full = std::sqrt((long double)g * p / rho);
        const double m = mach_number(s, GasModel::full_euler(g))(0, 0);
        CHECK(std::abs(m - double(q / c_full)) <= 1e-14 * std::max(1.0, m));

        const long double c_hom = std::sqrt((long double)g) * std::pow((long double)p, (g - 1.0L) / (2.0L * g));
        const double mh = mach_number(s, GasModel::homentropic(g))(0, 0);
        CHECK(std::abs(mh - double(q / c_hom)) <= 1e-14 * std::max(1.0, mh));

        const GasModel fe = GasModel::full_euler(g);
        const double diff = bernoulli(s, fe)(0, 0) - total_energy(s, fe)(0, 0);
        CHECK(diff == doctest::Approx(p / rho).epsilon(1e-13));
    }
}

TEST_CASE("a-priori bounds") {
    UpstreamRange r;
    r.b_min = 1.0;
    r.b_max = 2.0;
    CHECK(apriori_bounds(3.0, r, GasModel::homentropic(3.0)).speed_max == doctest::Approx(std::sqrt(2.0)));
    // The gamma -> infinity asymptote sqrt(2 max B).
    CHECK(apriori_bounds(1e9, r, GasModel::homentropic(1e9)).speed_max == doctest::Approx(2.0).epsilon(1e-8));

    UpstreamRange one;
    one.b_min = one.b_max = one.bs_min = one.bs_max = 1.0;
    const AprioriBounds b = apriori_bounds(2.0, one, GasModel::full_euler(2.0));
    CHECK(b.p_min == doctest::Approx(1.0 / 9.0));
    CHECK(b.p_max == doctest::Approx(0.25));

    double last = 0.0;
    for (double bmax : {1.0, 1.5, 2.0, 4.0, 8.0}) {
        r.b_max = bmax;
        const double s = apriori_bounds(5.0, r, GasModel::homentropic(5.0)).speed_max;
        CHECK(s >= last);
        last = s;
    }
    r.b_min = 0.0;
    CHECK_THROWS_AS(apriori_bounds(2.0, r, GasModel::homentropic(2.0)), InvalidUpstreamError);
}

TEST_CASE("energy sandwich holds for subsonic states and fails for supersonic ones") {
    const double g = 2.5;
    // Full Euler, rho = 1, p = 1: c^2 = g.
    const FlowState sub = uniform(1, 0.9 * std::sqrt(g), 0, 1);
    CHECK(energy_sandwich(sub, GasModel::full_euler(g)).holds);
    const FlowState sup = uniform(1, 1.1 * std::sqrt(g), 0, 1);
    CHECK_FALSE(energy_sandwich(sup, GasModel::full_euler(g)).holds);
    // The lower bound is attained at rest.
    const SandwichCheck rest = energy_sandwich(uniform(1, 0, 0, 1), GasModel::full_euler(g));
    CHECK(rest.worst_lower_margin == doctest::Approx(0.0));
}

TEST_CASE("profiles interpolate their analytic specs") {
    const Profile p(BumpProfile{2.0, 0.01, BumpShape::Parabola});
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        CHECK(p.value(x) == doctest::Approx(2.0 + 0.01 * x * (1 - x)).epsilon(1e-13));
        CHECK(p.derivative(x) == doctest::Approx(0.01 * (1 - 2 * x)).epsilon(1e-10));
    }
    const Profile c(BumpProfile{4.0, 0.2, BumpShape::Cosine});
    const double pi = 3.14159265358979323846;
    for (double x : {0.05, 0.4, 0.95}) {
        CHECK(c.value(x) == doctest::Approx(4.0 + 0.1 * (1 - std::cos(pi * x))).epsilon(1e-10));
        CHECK(c.derivative(x) == doctest::Approx(0.1 * pi * std::sin(pi * x)).epsilon(1e-8));
    }
    const Profile poly(PolynomialProfile{{1.0, 0.01}});
    CHECK(poly.min() == doctest::Approx(1.0));
    CHECK(poly.max() == doctest::Approx(1.01));
    CHECK_THROWS_AS(make_upstream(ConstantProfile{-1.0}).range(), InvalidUpstreamError);
}
