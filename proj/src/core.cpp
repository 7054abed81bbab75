#include "nozzle/core.hpp"

#include <algorithm>
#include <limits>

namespace nozzle {

namespace {

void require_positive(const Field& f, const char* name) {
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        for (Eigen::Index c = 0; c < f.cols(); ++c) {
            if (!(f(r, c) > 0.0)) {
                throw ClosureDomainError(std::string("nonpositive ") + name, r, c, f(r, c));
            }
        }
    }
}

}  // namespace

Field mach_number(const FlowState& state, const GasModel& gas) {
    require_positive(state.p, "pressure");
    const double g = gas.gamma;
    const Field speed = state.speed();
    if (gas.kind == GasKind::FullEuler) {
        require_positive(state.rho, "density");
        return speed * (state.rho / (g * state.p)).sqrt();
    }
    return speed * state.p.pow((1.0 - g) / (2.0 * g)) / std::sqrt(g);
}

Field bernoulli(const FlowState& state, const GasModel& gas) {
    const double g = gas.gamma;
    const Field q2 = state.u1.square() + state.u2.square();
    if (gas.kind == GasKind::FullEuler) {
        require_positive(state.rho, "density");
        return 0.5 * q2 + g * state.p / ((g - 1.0) * state.rho);
    }
    return g / (g - 1.0) * state.rho.pow(g - 1.0) + 0.5 * q2;
}

Field total_energy(const FlowState& state, const GasModel& gas) {
    const double g = gas.gamma;
    const Field q2 = state.u1.square() + state.u2.square();
    if (gas.kind == GasKind::FullEuler) {
        require_positive(state.rho, "density");
        return 0.5 * q2 + state.p / ((g - 1.0) * state.rho);
    }
    return 0.5 * q2 + state.p.pow((g - 1.0) / g) / (g - 1.0);
}

Field entropy(const FlowState& state, const GasModel& gas) {
    require_positive(state.p, "pressure");
    if (gas.kind == GasKind::Homentropic) {
        return Field::Ones(state.p.rows(), state.p.cols());
    }
    return state.rho * state.p.pow(-1.0 / gas.gamma);
}

AprioriBounds apriori_bounds(double gamma, const UpstreamRange& upstream, const GasModel& gas,
                             double mach_bar) {
    if (!(upstream.b_min > 0.0)) throw InvalidUpstreamError("upstream Bernoulli must be positive");
    const bool full = gas.kind == GasKind::FullEuler;
    if (full && !(upstream.s_min > 0.0)) {
        throw InvalidUpstreamError("upstream entropy must be positive");
    }
    const double g = gamma;
    const double bs_min = full ? upstream.bs_min : upstream.b_min;
    const double bs_max = full ? upstream.bs_max : upstream.b_max;
    const double s_min = full ? upstream.s_min : 1.0;
    const double s_max = full ? upstream.s_max : 1.0;

    AprioriBounds out;
    out.speed_max = std::sqrt(2.0 * (g - 1.0) / (g + 1.0) * upstream.b_max);
    const double expo = g / (g - 1.0);
    out.p_min = std::pow(2.0 * (g - 1.0) / (g * (g + 1.0)) * bs_min, expo);
    out.p_max = std::pow((g - 1.0) / g * bs_max, expo);
    // E is bracketed by multiples of p/rho = p^((g-1)/g) / S.
    out.e_min = std::pow(out.p_min, (g - 1.0) / g) / ((g - 1.0) * s_max);
    out.e_max = energy_upper_coefficient(g, mach_bar) * std::pow(out.p_max, (g - 1.0) / g) / s_min;
    return out;
}

SandwichCheck energy_sandwich(const FlowState& state, const GasModel& gas, double mach_bar,
                              double rel_tol) {
    const double g = gas.gamma;
    const Field e = total_energy(state, gas);
    const Field p_over_rho = gas.kind == GasKind::FullEuler ? Field(state.p / state.rho)
                                                            : Field(state.p.pow((g - 1.0) / g));
    const Field lower = p_over_rho / (g - 1.0);
    const Field upper = energy_upper_coefficient(g, mach_bar) * p_over_rho;

    SandwichCheck out;
    out.worst_lower_margin = ((e - lower) / e).minCoeff();
    out.worst_upper_margin = ((upper - e) / e).minCoeff();
    out.holds = out.worst_lower_margin >= -rel_tol && out.worst_upper_margin >= -rel_tol;
    return out;
}

}  // namespace nozzle
