// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "nozzle/checks.hpp"
#include "nozzle/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace nozzle;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = NOZZLE_CONFIG_DIR;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Least-squares slope of log y against log(1/gamma).
double fitted_rate(const std::vector<double>& gammas, const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double lx = -std::log(gammas[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

template <typename F>
std::vector<double> column(const SweepReport& r, F f) {
    std::vector<double> out;
    for (const SweepMetrics& m : r.metrics) out.push_back(f(m));
    return out;
}

std::string series(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt("%s%.3g", s.empty() ? "" : " ", x);
    return s;
}

bool in_window(double r) { return r >= 0.8 && r <= 1.2; }

template <typename G>
long double bisect_increasing(G g, long double lo, long double hi, long double target) {
    for (int it = 0; it < 500; ++it) {
        const long double mid = 0.5L * (lo + hi);
        (g(mid) < target ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const MmsStudy flat = mms_study(MmsCase::Flat, {32, 64, 128});
    const MmsStudy mapped = mms_study(MmsCase::Mapped, {32, 64, 128});
    const double t = seconds_since(t0);
    report(1, flat.order >= 1.9 && mapped.order >= 1.9 && t < 30.0,
           fmt("orders flat %.4f mapped %.4f (>= 1.9), %.2f s (< 30 s)", flat.order, mapped.order, t));
}

void criterion2() {
    // Subsonic branch of the Bernoulli relation: the head increases from the sonic
    // to the stagnation state, so bisection on [sonic, stagnation] isolates the root.
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> ug(1.05, 60.0), ub(0.3, 6.0), us(0.4, 2.5), uf(0.0, 0.999);
    double max_rel = 0, max_res = 0, max_mach = 0;
    int thrown = 0;
    for (int n = 0; n < 1000; ++n) {
        const double gamma = ug(rng), b = ub(rng), s = us(rng), frac = uf(rng);
        const long double G = gamma, B = b, S = s;
        try {
            // full Euler in p
            {
                const long double ps = std::pow(2 * S * (G - 1) * B / (G * (G + 1)), G / (G - 1));
                const double phi2 = double(frac * G * std::pow(ps, 1 + 1 / G) / S);
                auto head = [&](long double p) {
                    return phi2 / (2 * std::pow(p, 2 / G)) + G * std::pow(p, (G - 1) / G) / ((G - 1) * S);
                };
                const long double stag = std::pow((G - 1) * S * B / G, G / (G - 1));
                const long double oracle = bisect_increasing(head, ps, stag, B);
                const double p = subsonic_root_full(phi2, b, s, gamma);
                max_rel = std::max(max_rel, double(std::abs(p - oracle) / oracle));
                max_res = std::max(max_res, double(std::abs(head(p) - B) / B));
                const long double rho = S * std::pow((long double)p, 1 / G);
                const long double u2 = phi2 / std::pow((long double)p, 2 / G);
                max_mach = std::max(max_mach, double(std::sqrt(u2 / (G * p / rho))));
            }
            // homentropic in rho
            {
                const long double rs = std::pow(2 * (G - 1) * B / (G * (G + 1)), 1 / (G - 1));
                const double phi2 = double(frac * G * std::pow(rs, G + 1));
                auto head = [&](long double r) { return phi2 / (2 * r * r) + G / (G - 1) * std::pow(r, G - 1); };
                const long double stag = std::pow((G - 1) * B / G, 1 / (G - 1));
                const long double oracle = bisect_increasing(head, rs, stag, B);
                const double rho = subsonic_root_homentropic(phi2, b, gamma);
                max_rel = std::max(max_rel, double(std::abs(rho - oracle) / oracle));
                max_res = std::max(max_res, double(std::abs(head(rho) - B) / B));
                const long double u2 = phi2 / ((long double)rho * rho);
                max_mach = std::max(max_mach, double(std::sqrt(u2 / (G * std::pow((long double)rho, G - 1)))));
            }
        } catch (const std::exception&) {
            ++thrown;
        }
    }
    report(2, thrown == 0 && max_rel <= 1e-10 && max_res <= 1e-12 && max_mach <= 1.0,
           fmt("2 x 1000 roots: max rel error %.2e (<= 1e-10), max Bernoulli residual %.2e (<= 1e-12), "
               "max M %.4f (<= 1), %d threw",
               max_rel, max_res, max_mach, thrown));
}

void criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(kConfigs / "problem1.json");
    const double m = resolve_mass_flux(cfg);
    const auto grid = make_grid(cfg);
    try {
        const StreamSolution s = solve_problem1(m, cfg.gammas.front(), cfg.upstream(), grid, cfg.picard);
        const double update = s.history.back() * s.far_field.stream_top();
        const double mach = s.derived.mach.maxCoeff();
        double dev = 0.0;
        for (int k = 0; k < 10; ++k) {
            const int i = static_cast<int>(std::lround(k * grid->n_xi() / 9.0));
            dev = std::max(dev, std::abs(section_flux(s.state, *grid, i) - m) / m);
        }
        const double t = seconds_since(t0);
        report(3, update < 1e-8 * m && s.iterations <= 200 && mach < 1.0 && dev <= 1e-6 && t < 120.0,
               fmt("%d iterations, last update %.2e (< %.2e), max M %.4f, 10-station flux deviation %.2e "
                   "(<= 1e-6), %.2f s",
                   s.iterations, update, 1e-8 * m, mach, dev, t));
    } catch (const std::exception& e) {
        report(3, false, std::string("solve failed: ") + e.what());
    }
}

void criteria45() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(kConfigs / "axisym_sweep.json");
    const SweepReport r = gamma_sweep(sweep_setup(cfg));
    const double t = seconds_since(t0);
    if (!r.complete()) {
        report(4, false, "sweep incomplete: " + r.failures.front());
        report(5, false, "no complete sweep");
        return;
    }
    const auto& g = r.gammas;
    const auto dinf = column(r, [](auto& m) { return m.density_dev_linf; });
    const auto q1 = column(r, [](auto& m) { return m.lq_gap_1; });
    const auto q2 = column(r, [](auto& m) { return m.lq_gap_2; });
    const auto ref = column(r, [](auto& m) { return m.reference_distance; });
    const double rd = fitted_rate(g, dinf), r1 = fitted_rate(g, q1), r2 = fitted_rate(g, q2);
    const bool ok4 = strictly_decreasing(dinf) && in_window(rd) && strictly_decreasing(q1) && in_window(r1) &&
                     strictly_decreasing(q2) && in_window(r2) && strictly_decreasing(ref) &&
                     ref.back() <= 0.25 * ref.front() && t < 600.0;
    report(4, ok4,
           fmt("|p^(1/g)-1|_inf [%s] rate %.3f; L^q gaps rates %.3f, %.3f; reference distance [%s]; %.1f s",
               series(dinf).c_str(), rd, r1, r2, series(ref).c_str(), t));

    const ConditionReport& c = r.conditions;
    bool a1 = true, jensen = true;
    for (const SweepMetrics& m : r.metrics) {
        a1 = a1 && m.sup_mach < cfg.mach_bar;
        jensen = jensen && m.jensen_1 && m.jensen_2;
    }
    const double tv_ratio = *std::max_element(c.tv_vorticity.begin(), c.tv_vorticity.end()) /
                            *std::min_element(c.tv_vorticity.begin(), c.tv_vorticity.end());
    std::vector<double> h, f1;
    for (double v : c.h_value) h.push_back(std::abs(v));
    for (double v : c.f1_value) f1.push_back(std::abs(v));
    const double hr = h.front() / h.back(), fr = f1.front() / f1.back();
    const bool ok5 = a1 && tv_ratio <= 3.0 && strictly_decreasing(h) && strictly_decreasing(f1) && hr >= 4.0 &&
                     fr >= 4.0 && c.sandwich_all && jensen;
    report(5, ok5,
           fmt("A1 %s, TV ratio %.3f (<= 3), |H| reduction %.2f, |F1| reduction %.2f (>= 4), sandwich %s, "
               "Jensen %s",
               a1 ? "yes" : "no", tv_ratio, hr, fr, c.sandwich_all ? "yes" : "no", jensen ? "yes" : "no"));
}

void criterion6() {
    const RunConfig cfg = load_config(kConfigs / "full_euler_sweep.json");
    const SweepReport r = gamma_sweep(sweep_setup(cfg));
    if (!r.complete()) {
        report(6, false, "sweep incomplete: " + r.failures.front());
        return;
    }
    const auto rs = column(r, [](auto& m) { return m.rho_minus_s_l1; });
    const auto lim = column(r, [](auto& m) { return m.limit_residual; });
    const auto inc = column(r, [](auto& m) { return m.incompressibility; });
    const double rate = fitted_rate(r.gammas, rs);
    const double inc_max = *std::max_element(inc.begin(), inc.end());
    report(6, strictly_decreasing(rs) && in_window(rate) && strictly_decreasing(lim) && inc_max <= 1e-9,
           fmt("|rho-S|_1 [%s] rate %.3f; limit residual [%s]; max incompressibility %.2e (<= 1e-9)",
               series(rs).c_str(), rate, series(lim).c_str(), inc_max));
}

void criterion7() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pts = divcurl_diagnostic({8, 16, 32, 64}, 1024);
    const double t = seconds_since(t0);
    // phi = b((x-pi)/(pi/2)) b((y-pi)/(pi/2)), b(s) = (1-s^2)^3:  int phi = (pi/2 * 32/35)^2.
    const double limit = 0.5 * std::pow(0.5 * std::numbers::pi * 32.0 / 35.0, 2);
    double compliant = 0.0;
    for (const auto& p : pts) compliant = std::max(compliant, p.compliant);
    const double gap = std::abs(pts.back().violating - limit);
    report(7, compliant <= 1e-10 && gap <= 1e-2 && t < 5.0,
           fmt("compliant defect %.2e (<= 1e-10), violating %.6f vs %.6f at n=64 (gap %.2e <= 1e-2), %.2f s",
               compliant, pts.back().violating, limit, gap, t));
}

void criterion8() {
    RunConfig cfg = load_config(kConfigs / "full_euler_sweep.json");
    const double gamma = cfg.gammas.front();
    cfg.gammas = {gamma};
    const double m = resolve_mass_flux(cfg);
    std::vector<double> trace;
    for (int n : {64, 128, 256}) {
        cfg.n_xi = n;
        cfg.n_eta = n / 2;
        const auto grid = make_grid(cfg);
        const StreamSolution s = solve_problem1(m, gamma, cfg.upstream(), grid, cfg.picard);
        trace.push_back(normal_trace(s.state.u1, s.state.u2, *grid, TestFunctionFamily::wall(*grid)).gauss_green);
    }
    const double r1 = trace[1] / trace[0], r2 = trace[2] / trace[1];
    report(8, r1 >= 0.4 && r1 <= 0.6 && r2 >= 0.4 && r2 <= 0.6,
           fmt("traces [%s], ratios %.3f %.3f (in [0.4, 0.6])", series(trace).c_str(), r1, r2));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion9() {
    RunConfig cfg = load_config(kConfigs / "full_euler_sweep.json");
    const fs::path dir = fs::temp_directory_path() / "nozzle_acceptance_determinism";
    fs::remove_all(dir);
    cfg.output = dir.string();
    std::ostringstream log;
    const int c1 = run_sweep(cfg, log);
    const std::string csv = slurp(dir / "metrics.csv"), rep = slurp(dir / "report.json");
    const int c2 = run_sweep(cfg, log);
    const bool same = !csv.empty() && csv == slurp(dir / "metrics.csv") && rep == slurp(dir / "report.json");
    report(9, same && c1 == c2,
           fmt("two runs with %d threads: metrics.csv and report.json %s (exit %d, %d)", cfg.threads,
               same ? "byte-identical" : "differ", c1, c2));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> steps{criterion1, criterion2, criterion3, criteria45,
                                                   criterion6, criterion7, criterion8, criterion9};
    for (const auto& step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            std::printf("error: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%s\n", failures == 0 ? "all criteria passed" : (std::to_string(failures) + " failed").c_str());
    return failures == 0 ? 0 : 1;
}
