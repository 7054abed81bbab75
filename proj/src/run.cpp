#include "nozzle/run.hpp"

#include "nozzle/checks.hpp"
#include "nozzle/far_field.hpp"
#include "nozzle/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nozzle {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json series(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

bool is_full(const RunConfig& cfg) { return cfg.problem == SweepProblem::FullEuler2D; }

FarFieldKind kind_of(const RunConfig& cfg) {
    return is_full(cfg) ? FarFieldKind::FullEuler : FarFieldKind::Homentropic;
}

StreamSolution solve_one(const RunConfig& cfg, double m, double gamma, std::shared_ptr<const MappedGrid> grid) {
    const UpstreamProfiles up = cfg.upstream();
    return is_full(cfg) ? solve_problem1(m, gamma, up, grid, cfg.picard) : solve_problem2(m, gamma, up, grid, cfg.picard);
}

json solve_summary(const StreamSolution& s, const RunConfig& cfg) {
    const MappedGrid& g = s.grid();
    json j;
    j["status"] = "converged";
    j["problem"] = is_full(cfg) ? "full2d" : "axisym";
    j["gamma"] = s.gas.gamma;
    j["m"] = s.m;
    j["far_field"] = {{"level", s.far_field.level()},
                      {"density_weight", s.far_field.density_weight()},
                      {"stream_top", s.far_field.stream_top()},
                      {"mass_flux", s.far_field.mass_flux()}};
    j["iterations"] = s.iterations;
    j["history"] = series(s.history);

    // Ten evenly spaced sections, inlet and outlet included.
    const FaceFluxes mf = mass_fluxes(s);
    json stations = json::array(), averaged = json::array();
    double dev = 0.0, dev_avg = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int i = static_cast<int>(std::lround(k * g.n_xi() / 9.0));
        const double f = section_flux(mf, i);
        const double fa = section_flux(s.state, g, i);
        stations.push_back({{"index", i}, {"xi", g.xi_face(i)}, {"flux", f}});
        averaged.push_back(fa);
        dev = std::max(dev, std::abs(f - s.m) / s.m);
        dev_avg = std::max(dev_avg, std::abs(fa - s.m) / s.m);
    }
    j["flux"] = {{"stations", stations},
                 {"max_relative_deviation", dev},
                 {"face_average", averaged},
                 {"face_average_max_relative_deviation", dev_avg}};

    const AprioriBounds b = apriori_bounds(s.gas.gamma, s.far_field.upstream().range(), s.gas, cfg.mach_bar);
    const Field speed = s.state.speed();
    const Field c2 = s.gas.kind == GasKind::FullEuler
                         ? Field(s.gas.gamma * s.state.p / s.state.rho)
                         : Field(s.gas.gamma * s.state.p.pow((s.gas.gamma - 1.0) / s.gas.gamma));
    const SandwichCheck sw = energy_sandwich(s.state, s.gas, cfg.mach_bar);
    j["bounds"] = {{"max_mach", s.derived.mach.maxCoeff()},
                   {"min_sound_margin", (c2 - speed.square()).minCoeff()},
                   {"max_speed", speed.maxCoeff()},
                   {"speed_max_bound", b.speed_max},
                   {"min_u1", s.state.u1.minCoeff()},
                   {"p_min", s.state.p.minCoeff()},
                   {"p_max", s.state.p.maxCoeff()},
                   {"p_min_bound", b.p_min},
                   {"p_max_bound", b.p_max},
                   {"energy_sandwich", sw.holds}};
    const Field curl = discrete_curl(s.state);
    j["vorticity_consistency_l1"] = ((curl - s.derived.vorticity).abs() * g.measure()).sum();
    return j;
}

struct PlotSpec {
    std::string file;
    std::string title;
    std::vector<std::string> metrics;
};

std::vector<PlotSpec> plot_specs(bool full) {
    std::vector<PlotSpec> p{
        {"density.svg", "density deviation and L^q gaps",
         {"density_dev_linf", "density_dev_l1", "lq_gap_1", "lq_gap_2"}},
        {"residuals.svg", "weak residuals", {"compressible_residual", "limit_residual", "limit_div_u"}},
        {"trace.svg", "wall normal trace", {"normal_trace", "wall_flux"}},
    };
    p.push_back(full ? PlotSpec{"entropy.svg", "rho - S", {"rho_minus_s_l1"}}
                     : PlotSpec{"reference.svg", "distance to incompressible reference", {"reference_distance"}});
    return p;
}

void write_plots(const fs::path& dir, const CsvTable& csv, const json& fits, bool full) {
    std::vector<double> gammas;
    for (const auto& r : csv.rows) gammas.push_back(std::stod(r.at(0)));
    for (const PlotSpec& ps : plot_specs(full)) {
        std::vector<PlotSeries> ss;
        for (const std::string& name : ps.metrics) {
            const auto it = std::find(csv.header.begin(), csv.header.end(), name);
            if (it == csv.header.end()) continue;
            const std::size_t col = static_cast<std::size_t>(it - csv.header.begin());
            PlotSeries s{name, {}, std::nullopt};
            for (const auto& r : csv.rows) s.y.push_back(std::stod(r.at(col)));
            if (fits.contains(name) && fits[name].at("valid").get<bool>()) s.slope = fits[name].at("rate").get<double>();
            ss.push_back(std::move(s));
        }
        write_convergence_svg(dir / ps.file, ps.title, gammas, ss);
    }
}

}  // namespace

RunConfig apply_overrides(RunConfig cfg, const Overrides& ov) {
    if (ov.out) cfg.output = *ov.out;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.gammas) cfg.gammas = *ov.gammas;
    validate(cfg);
    return cfg;
}

double resolve_mass_flux(const RunConfig& cfg) {
    if (cfg.m_rule == MassFluxRule::Fixed) return cfg.m_value;
    const UpstreamProfiles up = cfg.upstream();
    double choke = INFINITY;
    for (double g : cfg.gammas) choke = std::min(choke, choking_flux(kind_of(cfg), up, g, !is_full(cfg)));
    return cfg.m_value * choke;
}

std::shared_ptr<const MappedGrid> make_grid(const RunConfig& cfg) {
    return std::make_shared<MappedGrid>(cfg.geometry(), cfg.half_length, cfg.n_xi, cfg.n_eta);
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = cfg.output;
    const std::string hash = config_hash(cfg);
    const double gamma = cfg.gammas.front();
    json failure;
    try {
        const double m = resolve_mass_flux(cfg);
        auto grid = make_grid(cfg);
        const StreamSolution s = solve_one(cfg, m, gamma, grid);
        const MappedGrid& g = *grid;
        write_field(dir, "rho", s.state.rho, g, hash);
        write_field(dir, "u1", s.state.u1, g, hash);
        write_field(dir, "u2", s.state.u2, g, hash);
        write_field(dir, "p", s.state.p, g, hash);
        write_field(dir, "psi", s.psi, g, hash);
        write_field(dir, "mach", s.derived.mach, g, hash);
        write_field(dir, "vorticity", s.derived.vorticity, g, hash);
        json summary = solve_summary(s, cfg);
        summary["config_hash"] = hash;
        summary["config"] = to_json(cfg);
        write_json(dir / "summary.json", summary);
        log << "converged in " << s.iterations << " iterations, max Mach "
            << format_double(summary["bounds"]["max_mach"].get<double>()) << "\n";
        return exit_code::ok;
    } catch (const SubsonicBreakdownError& e) {
        failure = {{"error", e.what()}, {"cell", {{"eta", e.row()}, {"xi", e.col()}}}};
    } catch (const NonConvergenceError& e) {
        failure = {{"error", e.what()}, {"history", series(e.history())}};
    } catch (const LinearSolverError& e) {
        failure = {{"error", e.what()}, {"linear_history", series(e.residual_history())}};
    } catch (const ChokedError& e) {
        failure = {{"error", e.what()}, {"sonic_margin", e.margin()}};
    } catch (const SolverStateError& e) {
        failure = {{"error", e.what()}};
    }
    failure["status"] = "breakdown";
    failure["gamma"] = gamma;
    failure["config_hash"] = hash;
    failure["config"] = to_json(cfg);
    write_json(dir / "summary.json", failure);
    log << "solver breakdown: " << failure["error"].get<std::string>() << "\n";
    return exit_code::breakdown;
}

CsvTable sweep_metrics_csv(const SweepReport& rep) {
    CsvTable t;
    t.header = {"gamma", "density_dev_l1", "density_dev_linf", "lq_gap_1", "lq_gap_2", "jensen_1", "jensen_2",
                "compressible_residual", "limit_residual", "limit_div_u", "incompressibility", "normal_trace",
                "wall_flux", "rho_minus_s_l1", "reference_distance", "sup_mach", "iterations"};
    for (const SweepMetrics& m : rep.metrics) {
        t.rows.push_back({format_double(m.gamma), format_double(m.density_dev_l1), format_double(m.density_dev_linf),
                          format_double(m.lq_gap_1), format_double(m.lq_gap_2), m.jensen_1 ? "1" : "0",
                          m.jensen_2 ? "1" : "0", format_double(m.compressible_residual),
                          format_double(m.limit_residual), format_double(m.limit_div_u),
                          format_double(m.incompressibility), format_double(m.normal_trace),
                          format_double(m.wall_flux), format_double(m.rho_minus_s_l1),
                          format_double(m.reference_distance), format_double(m.sup_mach),
                          std::to_string(m.iterations)});
    }
    return t;
}

json sweep_report_json(const SweepReport& rep, const RunConfig& cfg) {
    json j;
    j["config_hash"] = config_hash(cfg);
    j["config"] = to_json(cfg);
    j["m"] = rep.m;
    j["complete"] = rep.complete();
    j["failures"] = rep.failures;
    j["gammas"] = rep.gammas;

    json per = json::array();
    for (const SweepMetrics& m : rep.metrics) {
        json e;
        e["gamma"] = m.gamma;
        e["iterations"] = m.iterations;
        e["sup_mach"] = json_number(m.sup_mach);
        e["density_dev"] = {{"l1", json_number(m.density_dev_l1)}, {"linf", json_number(m.density_dev_linf)}};
        e["lq_law"] = {{"gap_1", json_number(m.lq_gap_1)}, {"gap_2", json_number(m.lq_gap_2)},
                       {"jensen_1", m.jensen_1}, {"jensen_2", m.jensen_2}};
        auto residuals = [](const SystemResiduals& r) {
            json o = json::object();
            for (std::size_t k = 0; k < r.names.size(); ++k) o[r.names[k]] = json_number(r.values[k]);
            return o;
        };
        e["compressible_residuals"] = residuals(m.compressible);
        e["limit_residuals"] = residuals(m.limit);
        e["incompressibility"] = json_number(m.incompressibility);
        e["normal_trace"] = {{"gauss_green", json_number(m.normal_trace)}, {"wall_flux", json_number(m.wall_flux)}};
        if (is_full(cfg)) e["rho_minus_s_l1"] = json_number(m.rho_minus_s_l1);
        else if (cfg.reference) e["reference_distance"] = json_number(m.reference_distance);
        per.push_back(e);
    }
    j["metrics"] = per;

    json fits = json::object();
    for (const SweepFit& f : rep.fits) fits[f.metric] = {{"rate", json_number(f.rate)}, {"valid", f.valid}};
    j["fits"] = fits;
    const auto rate = rep.rate(cfg.rate_metric);
    j["rate_check"] = {{"metric", cfg.rate_metric},
                       {"bracket", {cfg.rate_low, cfg.rate_high}},
                       {"rate", rate ? json_number(*rate) : json(nullptr)},
                       {"within", rate && *rate >= cfg.rate_low && *rate <= cfg.rate_high}};

    const ConditionReport& c = rep.conditions;
    j["conditions"] = {
        {"mach_bar", c.mach_bar},
        {"A1", {{"sup_mach", series(c.sup_mach)}, {"pass", c.a1}}},
        {"A2", {{"l1_speed2", series(c.l1_speed2)}, {"l1_pressure", series(c.l1_pressure)}}},
        {"A3", {{"tv_vorticity", series(c.tv_vorticity)},
                {"tv_ratio", json_number(c.tv_ratio)},
                {"note", "surrogate: total variation of vorticity across the sweep, not an H^-1 norm"}}},
        {"H", {{"values", series(c.h_value)}, {"decreasing", c.h_decreasing}, {"reduction", json_number(c.h_reduction)}}},
        {"F1", {{"values", series(c.f1_value)}, {"decreasing", c.f1_decreasing}, {"reduction", json_number(c.f1_reduction)}}},
        {"F2", {{"increments", series(c.f2_increment)}}},
        {"energy_sandwich", {{"per_gamma", c.sandwich}, {"all", c.sandwich_all}}},
    };

    auto bumps = [](const TestFunctionFamily& f) {
        json a = json::array();
        for (const Bump& b : f.bumps)
            a.push_back({{"cx", b.cx}, {"cy", b.cy}, {"sx", b.sx}, {"sy", b.sy}, {"scale", b.scale}});
        return a;
    };
    j["test_family"] = bumps(rep.family);
    j["wall_family"] = bumps(rep.wall_family);
    return j;
}

SweepSetup sweep_setup(const RunConfig& cfg) {
    SweepSetup setup;
    setup.problem = cfg.problem;
    setup.grid = make_grid(cfg);
    setup.upstream = cfg.upstream();
    setup.gammas = cfg.gammas;
    setup.picard = cfg.picard;
    setup.core_fraction = cfg.core_fraction;
    setup.mach_bar = cfg.mach_bar;
    setup.reference = cfg.reference;
    setup.threads = cfg.threads;
    setup.m = resolve_mass_flux(cfg);
    return setup;
}

int run_sweep(const RunConfig& cfg, std::ostream& log) {
    if (cfg.gammas.size() < 2) throw ConfigError("a sweep needs at least two gamma values");
    for (std::size_t k = 1; k < cfg.gammas.size(); ++k)
        if (!(cfg.gammas[k] > cfg.gammas[k - 1])) throw ConfigError("gamma list must be strictly increasing");
    const fs::path dir = cfg.output;

    SweepSetup setup;
    try {
        setup = sweep_setup(cfg);
    } catch (const ChokedError& e) {
        log << "cannot fix the mass flux: " << e.what() << "\n";
        return exit_code::breakdown;
    }

    const SweepReport rep = gamma_sweep(setup);
    const CsvTable csv = sweep_metrics_csv(rep);
    const json report = sweep_report_json(rep, cfg);
    write_csv(dir / "metrics.csv", csv);
    write_json(dir / "report.json", report);
    write_plots(dir, csv, report["fits"], is_full(cfg));

    for (const std::string& f : rep.failures) log << "failed: " << f << "\n";
    if (!rep.complete()) return exit_code::partial;
    const json& rc = report["rate_check"];
    log << cfg.rate_metric << " rate " << rc["rate"].dump() << " (bracket [" << format_double(cfg.rate_low) << ", "
        << format_double(cfg.rate_high) << "])\n";
    return rc["within"].get<bool>() ? exit_code::ok : exit_code::out_of_bracket;
}

int run_check(const RunConfig& cfg, std::ostream& log) {
    const CheckConfig& c = cfg.check;
    json out;
    out["config_hash"] = config_hash(cfg);
    bool all = true;
    for (const std::string& name : c.suites) {
        SuiteResult r;
        if (name == "mms") {
            r = run_mms_suite(c.mms_grids);
        } else if (name == "divcurl") {
            try {
                r = run_divcurl_suite(c.divcurl_ns, c.divcurl_cells);
            } catch (const ResolutionError& e) {
                out["suites"][name] = {{"pass", false}, {"error", e.what()}};
                write_json(fs::path(cfg.output) / "check.json", out);
                log << name << ": resolution error: " << e.what() << "\n";
                return exit_code::resolution;
            }
        } else {
            r = run_closure_suite(c.closure_samples, c.closure_seed);
        }
        out["suites"][name] = {{"pass", r.pass}, {"details", r.details}};
        log << name << ": " << (r.pass ? "pass" : "FAIL") << "\n";
        all = all && r.pass;
    }
    out["pass"] = all;
    write_json(fs::path(cfg.output) / "check.json", out);
    return all ? exit_code::ok : exit_code::failure;
}

int run_report(const fs::path& dir, std::ostream& log) {
    const json report = read_json(dir / "report.json");
    const CsvTable csv = read_csv(dir / "metrics.csv");
    const bool full = report.at("config").at("problem") == "full2d";
    write_plots(dir, csv, report.at("fits"), full);
    log << "gammas:";
    for (const auto& g : report.at("gammas")) log << " " << g.dump();
    log << "\ncomplete: " << (report.at("complete").get<bool>() ? "yes" : "no") << "\n";
    for (auto it = report.at("fits").begin(); it != report.at("fits").end(); ++it)
        log << "rate " << it.key() << ": " << it.value().at("rate").dump() << "\n";
    const json& rc = report.at("rate_check");
    log << "rate check " << rc.at("metric").get<std::string>() << ": "
        << (rc.at("within").get<bool>() ? "within" : "outside") << " bracket\n";
    return exit_code::ok;
}

int run_command(const std::string& command, const std::string& config_path, const Overrides& ov, std::ostream& log,
                std::ostream& err) {
    try {
        if (command == "report" && config_path.empty()) {
            if (!ov.out) throw ConfigError("report needs --out or --config");
            return run_report(*ov.out, log);
        }
        const RunConfig cfg = apply_overrides(load_config(config_path), ov);
        if (command == "solve") return run_solve(cfg, log);
        if (command == "sweep") return run_sweep(cfg, log);
        if (command == "check") return run_check(cfg, log);
        if (command == "report") return run_report(cfg.output, log);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const InvalidUpstreamError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
}

}  // namespace nozzle
