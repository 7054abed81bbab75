#include "nozzle/checks.hpp"

#include "nozzle/far_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nozzle {

namespace {

struct Manufactured {
    NozzleGeometry geometry;
    double half_length;
    std::function<double(double, double)> psi;
    std::function<double(double, double)> k;
    std::function<double(double, double)> source;
};

Manufactured manufactured(MmsCase which) {
    constexpr double pi = std::numbers::pi;
    if (which == MmsCase::Flat) {
        // x in [-1/2, 1/2]; shift so the solution vanishes on the boundary.
        return {TanhNozzle2D{0.0, 1.0}, 0.5,
                [](double x, double y) { return std::sin(pi * (x + 0.5)) * std::sin(pi * y); },
                [](double, double) { return 1.0; },
                [](double x, double y) { return 2.0 * pi * pi * std::sin(pi * (x + 0.5)) * std::sin(pi * y); }};
    }
    return {TanhNozzle2D{0.2, 1.2}, 1.0,
            [](double x, double y) { return std::sin(x) + y * y * std::cos(0.5 * x); },
            [](double x, double) { return 1.0 + 0.25 * x; },
            [](double x, double y) {
                const double px = std::cos(x) - 0.5 * y * y * std::sin(0.5 * x);
                const double pxx = -std::sin(x) - 0.25 * y * y * std::cos(0.5 * x);
                const double pyy = 2.0 * std::cos(0.5 * x);
                return -(0.25 * px + (1.0 + 0.25 * x) * (pxx + pyy));
            }};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Long-double bisection on the increasing subsonic branch of a Bernoulli function.
template <typename G>
long double bisect(G g, long double lo, long double hi, long double target) {
    for (int it = 0; it < 400 && hi - lo > 1e-30L * hi; ++it) {
        const long double mid = 0.5L * (lo + hi);
        (g(mid) < target ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

}  // namespace

MmsStudy mms_study(MmsCase which, const std::vector<int>& ns) {
    const Manufactured mf = manufactured(which);
    MmsStudy st;
    st.which = which;
    st.ns = ns;
    std::vector<double> lh, le;
    for (int n : ns) {
        auto g = std::make_shared<MappedGrid>(mf.geometry, mf.half_length, n, n);
        EllipticProblem p{g, sample(*g, mf.k), sample(*g, mf.source), {}};
        auto along_wall = [g, &mf](double eta) {
            return SideCondition::dirichlet([g, &mf, eta](double xi) {
                const Metric m = g->metric(xi, eta);
                return mf.psi(m.x, m.y);
            });
        };
        auto across = [g, &mf](double xi) {
            return SideCondition::dirichlet([g, &mf, xi](double eta) {
                const Metric m = g->metric(xi, eta);
                return mf.psi(m.x, m.y);
            });
        };
        p.boundary = {across(-mf.half_length), across(mf.half_length), along_wall(0.0), along_wall(1.0)};
        const Field psi = solve_linear(assemble(p), {1e-12, 20000, 200});
        const ErrorNorms e = mms_error(sample(*g, mf.psi), psi, *g);
        st.errors.push_back(e);
        lh.push_back(std::log(1.0 / n));
        le.push_back(std::log(e.l2));
    }
    st.order = ns.size() >= 2 ? slope(lh, le) : 0.0;
    return st;
}

ClosureStudy closure_study(int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ug(1.1, 12.0), ub(0.5, 5.0), us(0.5, 2.0), uf(0.0, 0.999);
    ClosureStudy st;
    for (int kind = 0; kind < 2; ++kind) {
        for (int n = 0; n < samples; ++n) {
            const double gamma = ug(rng), b = ub(rng), s = kind == 0 ? us(rng) : 1.0, frac = uf(rng);
            const long double G = gamma, B = b, S = s;
            long double phi2, lo, hi;
            std::function<long double(long double)> g;
            if (kind == 0) {
                // Sonic pressure: p^((g-1)/g) = 2 S (g-1) B / (g (g+1)); sonic phi2 = g p^(1+1/g) / S.
                const long double ps = std::pow(2 * S * (G - 1) * B / (G * (G + 1)), G / (G - 1));
                phi2 = frac * G * std::pow(ps, 1 + 1 / G) / S;
                g = [=](long double p) {
                    return phi2 / (2 * std::pow(p, 2 / G)) + G * std::pow(p, (G - 1) / G) / ((G - 1) * S);
                };
                lo = ps;
                hi = std::pow((G - 1) * S * B / G, G / (G - 1));
            } else {
                const long double rs = std::pow(2 * (G - 1) * B / (G * (G + 1)), 1 / (G - 1));
                phi2 = frac * G * std::pow(rs, G + 1);
                g = [=](long double r) { return phi2 / (2 * r * r) + G / (G - 1) * std::pow(r, G - 1); };
                lo = rs;
                hi = std::pow((G - 1) * B / G, 1 / (G - 1));
            }
            const long double oracle = bisect(g, lo, hi, B);
            ++st.samples;
            try {
                const double p2 = static_cast<double>(phi2);
                const double root = kind == 0 ? subsonic_root_full(p2, b, s, gamma) : subsonic_root_homentropic(p2, b, gamma);
                st.max_rel_error = std::max(st.max_rel_error, double(std::abs((root - oracle) / oracle)));
                st.max_bernoulli_residual = std::max(st.max_bernoulli_residual, double(std::abs(g(root) - B) / B));
                const long double m2 = kind == 0 ? S * phi2 / (G * std::pow((long double)root, 1 + 1 / G))
                                                 : phi2 / (G * std::pow((long double)root, G + 1));
                st.max_mach = std::max(st.max_mach, double(std::sqrt(m2)));
            } catch (const std::exception&) {
                ++st.failures;
            }
        }
    }
    return st;
}

SuiteResult run_mms_suite(const std::vector<int>& ns) {
    SuiteResult r{"mms", true, nlohmann::json::object()};
    for (MmsCase c : {MmsCase::Flat, MmsCase::Mapped}) {
        const MmsStudy st = mms_study(c, ns);
        nlohmann::json d;
        d["grids"] = ns;
        for (const ErrorNorms& e : st.errors) {
            d["l2"].push_back(e.l2);
            d["linf"].push_back(e.linf);
        }
        d["order"] = st.order;
        d["pass"] = st.order >= 1.9;
        r.pass = r.pass && st.order >= 1.9;
        r.details[c == MmsCase::Flat ? "flat" : "mapped"] = d;
    }
    return r;
}

SuiteResult run_divcurl_suite(const std::vector<int>& ns, int cells) {
    SuiteResult r{"divcurl", true, nlohmann::json::object()};
    const auto pts = divcurl_diagnostic(ns, cells);
    r.details["cells"] = cells;
    for (const DivCurlPoint& p : pts) {
        const bool ok = p.compliant <= 1e-10;
        r.pass = r.pass && ok;
        r.details["points"].push_back({{"n", p.n},
                                       {"compliant", p.compliant},
                                       {"violating", p.violating},
                                       {"violating_limit", p.violating_limit}});
    }
    if (!pts.empty()) {
        const DivCurlPoint& last = pts.back();
        const bool ok = std::abs(last.violating - last.violating_limit) <= 1e-2;
        r.details["violating_gap"] = std::abs(last.violating - last.violating_limit);
        r.pass = r.pass && ok;
    }
    return r;
}

SuiteResult run_closure_suite(int samples, unsigned seed) {
    const ClosureStudy st = closure_study(samples, seed);
    SuiteResult r{"closure", false, nlohmann::json::object()};
    r.details = {{"samples", st.samples},
                 {"max_rel_error", st.max_rel_error},
                 {"max_bernoulli_residual", st.max_bernoulli_residual},
                 {"max_mach", st.max_mach},
                 {"failures", st.failures}};
    r.pass = st.failures == 0 && st.max_rel_error <= 1e-10 && st.max_bernoulli_residual <= 1e-12 && st.max_mach <= 1.0;
    return r;
}

}  // namespace nozzle
