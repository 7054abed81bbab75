#include "nozzle/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

namespace nozzle {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double number(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return j.get<int>();
}

template <typename F>
void read(const json& obj, const char* key, const std::string& where, F&& apply) {
    if (obj.contains(key)) apply(obj.at(key), std::string(key), where);
}

ProfileSpec parse_profile(const json& j, const std::string& where) {
    require_object(j, where);
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError(where + ".kind must be a string");
    const std::string kind = j.at("kind");
    if (kind == "constant") {
        reject_unknown(j, where, {"kind", "value"});
        if (!j.contains("value")) throw ConfigError(where + ".value is required");
        return ConstantProfile{number(j.at("value"), "value", where)};
    }
    if (kind == "polynomial") {
        reject_unknown(j, where, {"kind", "coefficients"});
        if (!j.contains("coefficients") || !j.at("coefficients").is_array() || j.at("coefficients").empty())
            throw ConfigError(where + ".coefficients must be a nonempty array");
        PolynomialProfile p;
        for (const json& c : j.at("coefficients")) p.coefficients.push_back(number(c, "coefficients", where));
        return p;
    }
    if (kind == "bump") {
        reject_unknown(j, where, {"kind", "base", "delta", "shape", "center", "width"});
        BumpProfile p;
        read(j, "base", where, [&](const json& v, auto k, auto w) { p.base = number(v, k, w); });
        read(j, "delta", where, [&](const json& v, auto k, auto w) { p.delta = number(v, k, w); });
        read(j, "center", where, [&](const json& v, auto k, auto w) { p.center = number(v, k, w); });
        read(j, "width", where, [&](const json& v, auto k, auto w) { p.width = number(v, k, w); });
        if (j.contains("shape")) {
            const json& s = j.at("shape");
            if (s == "parabola") p.shape = BumpShape::Parabola;
            else if (s == "cosine") p.shape = BumpShape::Cosine;
            else if (s == "tanh") p.shape = BumpShape::Tanh;
            else throw ConfigError(where + ".shape must be parabola, cosine or tanh");
        }
        if (!(p.delta >= 0.0)) throw ConfigError(where + ".delta must be nonnegative");
        if (p.shape == BumpShape::Tanh && !(p.width > 0.0)) throw ConfigError(where + ".width must be positive");
        return p;
    }
    throw ConfigError(where + ".kind must be constant, polynomial or bump");
}

json profile_json(const ProfileSpec& spec) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantProfile>) {
                return {{"kind", "constant"}, {"value", p.value}};
            } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                return {{"kind", "polynomial"}, {"coefficients", p.coefficients}};
            } else {
                const char* shape = p.shape == BumpShape::Parabola ? "parabola"
                                    : p.shape == BumpShape::Cosine ? "cosine"
                                                                   : "tanh";
                return {{"kind", "bump"}, {"base", p.base}, {"delta", p.delta}, {"shape", shape},
                        {"center", p.center}, {"width", p.width}};
            }
        },
        spec);
}

const std::set<std::string> kSuites{"mms", "divcurl", "closure"};
const std::set<std::string> kRateMetrics{"density_dev_linf", "density_dev_l1", "lq_gap_1", "lq_gap_2",
                                         "limit_div_u", "rho_minus_s_l1", "reference_distance"};

}  // namespace

NozzleGeometry RunConfig::geometry() const {
    if (problem == SweepProblem::Axisymmetric) return TanhNozzleAxisym{r0};
    return TanhNozzle2D{a, b};
}

UpstreamProfiles RunConfig::upstream() const { return make_upstream(bernoulli, entropy); }

void validate(const RunConfig& c) {
    if (c.gammas.empty()) throw ConfigError("gas.gamma must list at least one value");
    for (double g : c.gammas) {
        if (!(g > 1.0)) throw ConfigError("gamma must exceed 1");
    }
    if (!(c.m_value > 0.0)) throw ConfigError("mass_flux.value must be positive");
    if (c.n_xi < 4 || c.n_eta < 4) throw ConfigError("grid needs at least 4 cells in each direction");
    if (!(c.half_length > 0.0)) throw ConfigError("geometry.half_length must be positive");
    if (c.problem == SweepProblem::FullEuler2D) {
        if (!(c.a >= 0.0) || !(c.b > c.a)) throw ConfigError("geometry needs a >= 0 and b > a");
    } else {
        if (!(c.r0 > 0.0)) throw ConfigError("geometry.r0 must be positive");
        if (c.entropy) throw ConfigError("upstream.entropy applies to full2d only");
    }
    if (!(c.picard.relaxation > 0.0 && c.picard.relaxation <= 1.0))
        throw ConfigError("solver.relaxation must lie in (0, 1]");
    if (c.picard.max_outer < 1 || c.picard.max_halvings < 0) throw ConfigError("solver iteration caps must be positive");
    if (!(c.picard.outer_tolerance > 0.0) || !(c.picard.linear.tolerance > 0.0))
        throw ConfigError("solver tolerances must be positive");
    if (!(c.core_fraction > 0.0 && c.core_fraction < 1.0)) throw ConfigError("harness.core_fraction must lie in (0, 1)");
    if (!(c.mach_bar > 0.0)) throw ConfigError("harness.mach_bar must be positive");
    if (!kRateMetrics.count(c.rate_metric)) throw ConfigError("harness.rate_metric '" + c.rate_metric + "' is not a fitted metric");
    if (!(c.rate_low < c.rate_high)) throw ConfigError("harness.rate_bracket must be increasing");
    if (c.check.suites.empty()) throw ConfigError("check.suites is empty");
    for (const std::string& s : c.check.suites) {
        if (!kSuites.count(s)) throw ConfigError("unknown check suite '" + s + "'");
    }
    if (c.check.mms_grids.size() < 2) throw ConfigError("check.mms_grids needs at least two grids");
    for (int n : c.check.mms_grids) {
        if (n < 4) throw ConfigError("check.mms_grids entries must be >= 4");
    }
    if (c.check.divcurl_cells < 1 || c.check.closure_samples < 1) throw ConfigError("check counts must be positive");
    if (c.threads < 1) throw ConfigError("threads must be at least 1");
}

RunConfig parse_config(const json& doc) {
    require_object(doc, "config");
    reject_unknown(doc, "config", {"schema_version", "problem", "geometry", "gas", "mass_flux", "upstream", "solver",
                                   "harness", "check", "output", "threads"});
    if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer())
        throw ConfigError("schema_version is required");
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
        throw ConfigError("unsupported schema_version " + doc.at("schema_version").dump());

    RunConfig c;
    if (!doc.contains("problem")) throw ConfigError("problem is required");
    if (doc.at("problem") == "full2d") c.problem = SweepProblem::FullEuler2D;
    else if (doc.at("problem") == "axisym") c.problem = SweepProblem::Axisymmetric;
    else throw ConfigError("problem must be full2d or axisym");

    if (doc.contains("geometry")) {
        const json& g = doc.at("geometry");
        const std::string w = "geometry";
        require_object(g, w);
        reject_unknown(g, w, {"a", "b", "r0", "half_length", "n_xi", "n_eta"});
        read(g, "a", w, [&](const json& v, auto k, auto ww) { c.a = number(v, k, ww); });
        read(g, "b", w, [&](const json& v, auto k, auto ww) { c.b = number(v, k, ww); });
        read(g, "r0", w, [&](const json& v, auto k, auto ww) { c.r0 = number(v, k, ww); });
        read(g, "half_length", w, [&](const json& v, auto k, auto ww) { c.half_length = number(v, k, ww); });
        read(g, "n_xi", w, [&](const json& v, auto k, auto ww) { c.n_xi = integer(v, k, ww); });
        read(g, "n_eta", w, [&](const json& v, auto k, auto ww) { c.n_eta = integer(v, k, ww); });
    }
    if (!doc.contains("gas")) throw ConfigError("gas is required");
    {
        const json& g = doc.at("gas");
        require_object(g, "gas");
        reject_unknown(g, "gas", {"gamma"});
        if (!g.contains("gamma")) throw ConfigError("gas.gamma is required");
        const json& v = g.at("gamma");
        c.gammas.clear();
        if (v.is_array()) {
            for (const json& x : v) c.gammas.push_back(number(x, "gamma", "gas"));
        } else {
            c.gammas.push_back(number(v, "gamma", "gas"));
        }
    }
    if (doc.contains("mass_flux")) {
        const json& m = doc.at("mass_flux");
        require_object(m, "mass_flux");
        reject_unknown(m, "mass_flux", {"rule", "value"});
        if (m.contains("rule")) {
            if (m.at("rule") == "fixed") c.m_rule = MassFluxRule::Fixed;
            else if (m.at("rule") == "choking_fraction") c.m_rule = MassFluxRule::ChokingFraction;
            else throw ConfigError("mass_flux.rule must be fixed or choking_fraction");
        }
        read(m, "value", "mass_flux", [&](const json& v, auto k, auto w) { c.m_value = number(v, k, w); });
    }
    if (doc.contains("upstream")) {
        const json& u = doc.at("upstream");
        require_object(u, "upstream");
        reject_unknown(u, "upstream", {"bernoulli", "entropy"});
        if (u.contains("bernoulli")) c.bernoulli = parse_profile(u.at("bernoulli"), "upstream.bernoulli");
        if (u.contains("entropy")) c.entropy = parse_profile(u.at("entropy"), "upstream.entropy");
    }
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        const std::string w = "solver";
        require_object(s, w);
        reject_unknown(s, w, {"relaxation", "max_outer", "outer_tolerance", "max_halvings", "linear_tolerance",
                              "linear_max_iterations", "linear_max_corrections"});
        PicardConfig& p = c.picard;
        read(s, "relaxation", w, [&](const json& v, auto k, auto ww) { p.relaxation = number(v, k, ww); });
        read(s, "max_outer", w, [&](const json& v, auto k, auto ww) { p.max_outer = integer(v, k, ww); });
        read(s, "outer_tolerance", w, [&](const json& v, auto k, auto ww) { p.outer_tolerance = number(v, k, ww); });
        read(s, "max_halvings", w, [&](const json& v, auto k, auto ww) { p.max_halvings = integer(v, k, ww); });
        read(s, "linear_tolerance", w, [&](const json& v, auto k, auto ww) { p.linear.tolerance = number(v, k, ww); });
        read(s, "linear_max_iterations", w,
             [&](const json& v, auto k, auto ww) { p.linear.max_iterations = integer(v, k, ww); });
        read(s, "linear_max_corrections", w,
             [&](const json& v, auto k, auto ww) { p.linear.max_corrections = integer(v, k, ww); });
    }
    if (doc.contains("harness")) {
        const json& h = doc.at("harness");
        const std::string w = "harness";
        require_object(h, w);
        reject_unknown(h, w, {"core_fraction", "mach_bar", "reference", "rate_metric", "rate_bracket"});
        read(h, "core_fraction", w, [&](const json& v, auto k, auto ww) { c.core_fraction = number(v, k, ww); });
        read(h, "mach_bar", w, [&](const json& v, auto k, auto ww) { c.mach_bar = number(v, k, ww); });
        if (h.contains("reference")) {
            if (!h.at("reference").is_boolean()) throw ConfigError("harness.reference must be a boolean");
            c.reference = h.at("reference").get<bool>();
        }
        if (h.contains("rate_metric")) {
            if (!h.at("rate_metric").is_string()) throw ConfigError("harness.rate_metric must be a string");
            c.rate_metric = h.at("rate_metric").get<std::string>();
        }
        if (h.contains("rate_bracket")) {
            const json& b = h.at("rate_bracket");
            if (!b.is_array() || b.size() != 2) throw ConfigError("harness.rate_bracket must be [low, high]");
            c.rate_low = number(b[0], "rate_bracket", w);
            c.rate_high = number(b[1], "rate_bracket", w);
        }
    }
    if (doc.contains("check")) {
        const json& k = doc.at("check");
        const std::string w = "check";
        require_object(k, w);
        reject_unknown(k, w, {"suites", "mms_grids", "divcurl_ns", "divcurl_cells", "closure_samples", "closure_seed"});
        CheckConfig& cc = c.check;
        if (k.contains("suites")) {
            if (!k.at("suites").is_array()) throw ConfigError("check.suites must be an array");
            cc.suites.clear();
            for (const json& s : k.at("suites")) {
                if (!s.is_string()) throw ConfigError("check.suites entries must be strings");
                cc.suites.push_back(s.get<std::string>());
            }
        }
        auto ints = [&](const char* key, std::vector<int>& out) {
            if (!k.contains(key)) return;
            if (!k.at(key).is_array()) throw ConfigError(w + "." + key + " must be an array");
            out.clear();
            for (const json& v : k.at(key)) out.push_back(integer(v, key, w));
        };
        ints("mms_grids", cc.mms_grids);
        ints("divcurl_ns", cc.divcurl_ns);
        read(k, "divcurl_cells", w, [&](const json& v, auto kk, auto ww) { cc.divcurl_cells = integer(v, kk, ww); });
        read(k, "closure_samples", w, [&](const json& v, auto kk, auto ww) { cc.closure_samples = integer(v, kk, ww); });
        read(k, "closure_seed", w, [&](const json& v, auto kk, auto ww) {
            cc.closure_seed = static_cast<unsigned>(integer(v, kk, ww));
        });
    }
    if (doc.contains("output")) {
        if (!doc.at("output").is_string()) throw ConfigError("output must be a string");
        c.output = doc.at("output").get<std::string>();
    }
    read(doc, "threads", "config", [&](const json& v, auto k, auto w) { c.threads = integer(v, k, w); });

    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["problem"] = c.problem == SweepProblem::FullEuler2D ? "full2d" : "axisym";
    j["geometry"] = {{"a", c.a}, {"b", c.b}, {"r0", c.r0}, {"half_length", c.half_length},
                     {"n_xi", c.n_xi}, {"n_eta", c.n_eta}};
    j["gas"] = {{"gamma", c.gammas}};
    j["mass_flux"] = {{"rule", c.m_rule == MassFluxRule::Fixed ? "fixed" : "choking_fraction"}, {"value", c.m_value}};
    j["upstream"] = {{"bernoulli", profile_json(c.bernoulli)}};
    if (c.entropy) j["upstream"]["entropy"] = profile_json(*c.entropy);
    j["solver"] = {{"relaxation", c.picard.relaxation},
                   {"max_outer", c.picard.max_outer},
                   {"outer_tolerance", c.picard.outer_tolerance},
                   {"max_halvings", c.picard.max_halvings},
                   {"linear_tolerance", c.picard.linear.tolerance},
                   {"linear_max_iterations", c.picard.linear.max_iterations},
                   {"linear_max_corrections", c.picard.linear.max_corrections}};
    j["harness"] = {{"core_fraction", c.core_fraction}, {"mach_bar", c.mach_bar}, {"reference", c.reference},
                    {"rate_metric", c.rate_metric}, {"rate_bracket", {c.rate_low, c.rate_high}}};
    j["check"] = {{"suites", c.check.suites},
                  {"mms_grids", c.check.mms_grids},
                  {"divcurl_ns", c.check.divcurl_ns},
                  {"divcurl_cells", c.check.divcurl_cells},
                  {"closure_samples", c.check.closure_samples},
                  {"closure_seed", c.check.closure_seed}};
    j["output"] = c.output;
    j["threads"] = c.threads;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    // The output directory and thread count do not change results.
    json j = to_json(cfg);
    j.erase("output");
    j.erase("threads");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nozzle
