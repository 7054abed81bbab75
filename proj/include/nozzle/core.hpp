#pragma once

// Gas-dynamic closures for polytropic gases and the state containers shared by
// the solver and the limit harness. Scalar closures are templated so that test
// oracles can evaluate them in extended precision.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace nozzle {

/// Cell-centred scalar field, stored (n_eta rows) x (n_xi columns), row-major.
using Field = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class MappedGrid;

enum class GasKind { Homentropic, FullEuler };

struct GasModel {
    GasKind kind = GasKind::Homentropic;
    double gamma = 1.4;

    static GasModel homentropic(double gamma);
    static GasModel full_euler(double gamma);
};

/// Thrown when a closure is evaluated outside its domain (p <= 0 or rho <= 0).
class ClosureDomainError : public std::domain_error {
public:
    ClosureDomainError(const std::string& what, Eigen::Index row, Eigen::Index col, double value)
        : std::domain_error(what + " at cell (eta=" + std::to_string(row) + ", xi=" +
                            std::to_string(col) + "), value " + std::to_string(value)),
          row_(row), col_(col), value_(value) {}

    Eigen::Index row() const { return row_; }
    Eigen::Index col() const { return col_; }
    double value() const { return value_; }

private:
    Eigen::Index row_;
    Eigen::Index col_;
    double value_;
};

class InvalidUpstreamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline GasModel GasModel::homentropic(double gamma) {
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    return {GasKind::Homentropic, gamma};
}

inline GasModel GasModel::full_euler(double gamma) {
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    return {GasKind::FullEuler, gamma};
}

/// Cell fields (rho, u, p). Planar states use (u1, u2) = (u_x1, u_x2); axisymmetric
/// states use (u1, u2) = (U, V) in the (x1, r) half-plane.
struct FlowState {
    Field rho;
    Field u1;
    Field u2;
    Field p;
    std::shared_ptr<const MappedGrid> grid;

    Field speed() const { return (u1.square() + u2.square()).sqrt(); }
};

struct DerivedFields {
    Field mach;
    Field bernoulli;
    Field entropy;
    Field energy;
    Field vorticity;
};

struct AprioriBounds {
    double speed_max = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
};

/// Extremes of the upstream data needed by the a-priori bounds.
struct UpstreamRange {
    double b_min = 0.0;
    double b_max = 0.0;
    double s_min = 1.0;
    double s_max = 1.0;
    double bs_min = 0.0;
    double bs_max = 0.0;
};

// ---------------------------------------------------------------------------
// Scalar closures
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar sonic_speed_full(Scalar rho, Scalar p, Scalar gamma) {
    using std::sqrt;
    return sqrt(gamma * p / rho);
}

template <typename Scalar>
Scalar sonic_speed_homentropic(Scalar p, Scalar gamma) {
    using std::pow;
    using std::sqrt;
    return sqrt(gamma) * pow(p, (gamma - 1) / (2 * gamma));
}

template <typename Scalar>
Scalar mach_full(Scalar speed, Scalar rho, Scalar p, Scalar gamma) {
    using std::sqrt;
    return speed * sqrt(rho / (gamma * p));
}

template <typename Scalar>
Scalar mach_homentropic(Scalar speed, Scalar p, Scalar gamma) {
    using std::pow;
    using std::sqrt;
    return speed * pow(p, (1 - gamma) / (2 * gamma)) / sqrt(gamma);
}

template <typename Scalar>
Scalar bernoulli_full(Scalar speed, Scalar rho, Scalar p, Scalar gamma) {
    return speed * speed / 2 + gamma * p / ((gamma - 1) * rho);
}

template <typename Scalar>
Scalar bernoulli_homentropic(Scalar speed, Scalar rho, Scalar gamma) {
    using std::pow;
    return gamma / (gamma - 1) * pow(rho, gamma - 1) + speed * speed / 2;
}

template <typename Scalar>
Scalar energy_full(Scalar speed, Scalar rho, Scalar p, Scalar gamma) {
    return speed * speed / 2 + p / ((gamma - 1) * rho);
}

template <typename Scalar>
Scalar energy_homentropic(Scalar speed, Scalar p, Scalar gamma) {
    using std::pow;
    return speed * speed / 2 + pow(p, (gamma - 1) / gamma) / (gamma - 1);
}

template <typename Scalar>
Scalar entropy_of(Scalar rho, Scalar p, Scalar gamma) {
    using std::pow;
    return rho * pow(p, -1 / gamma);
}

/// Coefficient of p/rho in the upper energy bound for Mach numbers <= mach_bar.
template <typename Scalar>
Scalar energy_upper_coefficient(Scalar gamma, Scalar mach_bar) {
    return ((gamma - 1) * gamma * mach_bar * mach_bar + 2) / (2 * (gamma - 1));
}

// ---------------------------------------------------------------------------
// Field closures
// ---------------------------------------------------------------------------

/// Mach number field. Throws ClosureDomainError on p <= 0 (or rho <= 0 for full Euler).
Field mach_number(const FlowState& state, const GasModel& gas);

/// Bernoulli field, kind-appropriate.
Field bernoulli(const FlowState& state, const GasModel& gas);

/// Total energy |u|^2/2 + p/((gamma-1) rho); for homentropic states rho = p^(1/gamma).
Field total_energy(const FlowState& state, const GasModel& gas);

/// S = rho p^(-1/gamma); identically 1 for homentropic states.
Field entropy(const FlowState& state, const GasModel& gas);

AprioriBounds apriori_bounds(double gamma, const UpstreamRange& upstream, const GasModel& gas,
                             double mach_bar = 1.0);

/// Result of the pointwise energy sandwich
///   p/((gamma-1) rho) <= E <= ((gamma-1) gamma Mbar^2 + 2)/(2 (gamma-1)) p/rho.
struct SandwichCheck {
    bool holds = true;
    double worst_lower_margin = 0.0;  ///< min of (E - lower)/E
    double worst_upper_margin = 0.0;  ///< min of (upper - E)/E
};

SandwichCheck energy_sandwich(const FlowState& state, const GasModel& gas, double mach_bar = 1.0,
                              double rel_tol = 1e-12);

}  // namespace nozzle
