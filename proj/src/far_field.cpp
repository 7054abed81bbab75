#include "nozzle/far_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace nozzle {

namespace {

constexpr int kPanels = 1024;

// 5-point Gauss-Legendre on [0,1].
constexpr std::array<double, 5> kGaussX = {0.04691007703066800360, 0.23076534494715845448, 0.5,
                                           0.76923465505284154552, 0.95308992296933199640};
constexpr std::array<double, 5> kGaussW = {0.11846344252809454376, 0.23931433524968323402,
                                           0.28444444444444444444, 0.23931433524968323402,
                                           0.11846344252809454376};

double panel_integral(const std::function<double(double)>& f, double a, double b) {
    double s = 0.0;
    for (std::size_t q = 0; q < kGaussX.size(); ++q) s += kGaussW[q] * f(a + (b - a) * kGaussX[q]);
    return s * (b - a);
}

// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi).
double bracketed_root(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                      double lo, double hi, const RootOptions& opt) {
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.tolerance * (1.0 + std::abs(mid))) break;
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0) hi = mid;
        else lo = mid;
    }
    double x = 0.5 * (lo + hi);
    if (opt.newton_polish) {
        for (int it = 0; it < 3; ++it) {
            const double d = dg(x);
            if (!(d > 0.0)) break;
            const double next = x - g(x) / d;
            if (!(next >= lo && next <= hi)) break;
            if (std::abs(g(next)) > std::abs(g(x))) break;
            x = next;
        }
    }
    return x;
}

double stagnation_level(FarFieldKind kind, double bs, double gamma) {
    switch (kind) {
        case FarFieldKind::FullEuler:
            return std::pow((gamma - 1.0) / gamma * bs, gamma / (gamma - 1.0));
        case FarFieldKind::Homentropic:
            return std::pow((gamma - 1.0) / gamma * bs, 1.0 / (gamma - 1.0));
        case FarFieldKind::Incompressible:
            return bs;
    }
    return 0.0;
}

double sonic_level(FarFieldKind kind, double bs, double gamma) {
    const double c = 2.0 * (gamma - 1.0) / (gamma * (gamma + 1.0)) * bs;
    if (kind == FarFieldKind::FullEuler) return std::pow(c, gamma / (gamma - 1.0));
    return std::pow(c, 1.0 / (gamma - 1.0));
}

double velocity_at(FarFieldKind kind, double level, double gamma, double b, double s) {
    double head = 0.0;
    switch (kind) {
        case FarFieldKind::FullEuler:
            head = gamma * std::pow(level, (gamma - 1.0) / gamma) / ((gamma - 1.0) * s);
            break;
        case FarFieldKind::Homentropic:
            head = gamma / (gamma - 1.0) * std::pow(level, gamma - 1.0);
            break;
        case FarFieldKind::Incompressible:
            head = level;
            break;
    }
    return std::sqrt(std::max(0.0, 2.0 * (b - head)));
}

double weight_of(FarFieldKind kind, double level, double gamma) {
    switch (kind) {
        case FarFieldKind::FullEuler:
            return std::pow(level, 1.0 / gamma);
        case FarFieldKind::Homentropic:
            return level;
        case FarFieldKind::Incompressible:
            return 1.0;
    }
    return 1.0;
}

struct Bracket {
    double lo;
    double hi;
};

Bracket subsonic_bracket(FarFieldKind kind, const UpstreamProfiles& upstream, double gamma) {
    const UpstreamRange r = upstream.range();
    const bool full = kind == FarFieldKind::FullEuler;
    const double lo = sonic_level(kind, full ? r.bs_max : r.b_max, gamma);
    const double hi = stagnation_level(kind, full ? r.bs_min : r.b_min, gamma);
    if (!(lo < hi)) {
        throw InvalidUpstreamError("upstream data admit no uniformly subsonic inlet state");
    }
    return {lo, hi};
}

}  // namespace

double subsonic_root_homentropic(double phi2, double bernoulli, double gamma, const RootOptions& opt) {
    if (!(phi2 >= 0.0)) throw std::domain_error("squared mass-flux magnitude must be nonnegative");
    if (!(bernoulli > 0.0)) throw std::domain_error("Bernoulli constant must be positive");
    if (!(gamma > 1.0)) throw std::domain_error("gamma must exceed 1");

    const double k = gamma / (gamma - 1.0);
    auto g = [&](double rho) { return phi2 / (2.0 * rho * rho) + k * std::pow(rho, gamma - 1.0) - bernoulli; };
    auto dg = [&](double rho) { return -phi2 / (rho * rho * rho) + gamma * std::pow(rho, gamma - 2.0); };

    const double stag = std::pow(bernoulli / k, 1.0 / (gamma - 1.0));
    if (phi2 == 0.0) return stag;
    const double sonic = std::pow(phi2 / gamma, 1.0 / (gamma + 1.0));
    const double excess = g(sonic);
    if (excess > 1e-14 * bernoulli) throw ChokedError("no subsonic density: flow is choked", excess);
    if (excess >= -1e-14 * bernoulli) return sonic;
    return bracketed_root(g, dg, sonic, std::max(stag, sonic), opt);
}

double subsonic_root_full(double phi2, double bernoulli, double entropy, double gamma,
                          const RootOptions& opt) {
    if (!(phi2 >= 0.0)) throw std::domain_error("squared flux magnitude must be nonnegative");
    if (!(entropy > 0.0)) throw std::domain_error("entropy must be positive");
    if (!(bernoulli > 0.0)) throw std::domain_error("Bernoulli constant must be positive");
    if (!(gamma > 1.0)) throw std::domain_error("gamma must exceed 1");

    const double k = gamma / ((gamma - 1.0) * entropy);
    auto g = [&](double p) {
        return phi2 / (2.0 * std::pow(p, 2.0 / gamma)) + k * std::pow(p, (gamma - 1.0) / gamma) - bernoulli;
    };
    auto dg = [&](double p) {
        return -phi2 / (gamma * std::pow(p, (gamma + 2.0) / gamma)) + std::pow(p, -1.0 / gamma) / entropy;
    };

    const double stag = std::pow(bernoulli / k, gamma / (gamma - 1.0));
    if (phi2 == 0.0) return stag;
    const double sonic = std::pow(entropy * phi2 / gamma, gamma / (gamma + 1.0));
    const double excess = g(sonic);
    if (excess > 1e-14 * bernoulli) throw ChokedError("no subsonic pressure: flow is choked", excess);
    if (excess >= -1e-14 * bernoulli) return sonic;
    return bracketed_root(g, dg, sonic, std::max(stag, sonic), opt);
}

double inlet_flux(FarFieldKind kind, double level, const UpstreamProfiles& upstream, double gamma,
                  bool axisymmetric) {
    const double weight = weight_of(kind, level, gamma);
    auto integrand = [&](double t) {
        const double s = upstream.s(t);
        const double density = kind == FarFieldKind::FullEuler ? s * weight : weight;
        const double u = velocity_at(kind, level, gamma, upstream.b(t), s);
        return density * u * (axisymmetric ? t : 1.0);
    };
    double total = 0.0;
    for (int k = 0; k < kPanels; ++k) {
        total += panel_integral(integrand, static_cast<double>(k) / kPanels, static_cast<double>(k + 1) / kPanels);
    }
    return total;
}

double choking_flux(FarFieldKind kind, const UpstreamProfiles& upstream, double gamma, bool axisymmetric) {
    if (kind == FarFieldKind::Incompressible) return std::numeric_limits<double>::infinity();
    const Bracket br = subsonic_bracket(kind, upstream, gamma);
    return inlet_flux(kind, br.lo, upstream, gamma, axisymmetric);
}

FarFieldState::FarFieldState(FarFieldKind kind, double gamma, bool axisymmetric, double level,
                             UpstreamProfiles upstream)
    : kind_(kind),
      gamma_(gamma),
      axisymmetric_(axisymmetric),
      level_(level),
      weight_(weight_of(kind, level, gamma)),
      upstream_(std::move(upstream)) {
    t_.resize(kPanels + 1);
    psi_.resize(kPanels + 1);
    dpsi_.resize(kPanels + 1);
    mass_.assign(kPanels + 1, 0.0);
    dmass_.resize(kPanels + 1);
    auto density = [&](double t) { return stream_density(t); };
    auto mass = [&](double t) {
        return kind_ == FarFieldKind::FullEuler ? upstream_.s(t) * stream_density(t) : stream_density(t);
    };
    psi_[0] = 0.0;
    for (int k = 0; k <= kPanels; ++k) {
        t_[k] = static_cast<double>(k) / kPanels;
        dpsi_[k] = density(t_[k]);
        dmass_[k] = mass(t_[k]);
        if (k > 0) {
            psi_[k] = psi_[k - 1] + panel_integral(density, t_[k - 1], t_[k]);
            mass_[k] = mass_[k - 1] + panel_integral(mass, t_[k - 1], t_[k]);
        }
    }
    mass_flux_ = mass_.back();
}

double FarFieldState::pressure() const {
    switch (kind_) {
        case FarFieldKind::FullEuler:
            return level_;
        case FarFieldKind::Homentropic:
            return std::pow(level_, gamma_);
        case FarFieldKind::Incompressible:
            return level_;
    }
    return level_;
}

double FarFieldState::velocity(double t) const {
    return velocity_at(kind_, level_, gamma_, upstream_.b(t), upstream_.s(t));
}

double FarFieldState::stream_density(double t) const {
    return weight_ * velocity(t) * (axisymmetric_ ? t : 1.0);
}

namespace {

double uniform_hermite(const std::vector<double>& t, const std::vector<double>& f, const std::vector<double>& df,
                       double x) {
    x = std::clamp(x, 0.0, 1.0);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(x * kPanels), kPanels - 1);
    const double h = t[k + 1] - t[k];
    const double s = (x - t[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f[k] + (s3 - 2 * s2 + s) * h * df[k] + (-2 * s3 + 3 * s2) * f[k + 1] +
           (s3 - s2) * h * df[k + 1];
}

}  // namespace

double FarFieldState::psi(double t) const { return uniform_hermite(t_, psi_, dpsi_, t); }

double FarFieldState::cumulative_mass(double t) const { return uniform_hermite(t_, mass_, dmass_, t); }

double FarFieldState::psi_inverse(double value) const {
    if (value <= 0.0) return 0.0;
    if (value >= psi_.back()) return 1.0;
    auto it = std::upper_bound(psi_.begin(), psi_.end(), value);
    const std::size_t k = static_cast<std::size_t>(it - psi_.begin()) - 1;
    double lo = t_[k];
    double hi = t_[k + 1];
    for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (psi(mid) < value) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

FarFieldState solve_far_field(FarFieldKind kind, double m, const UpstreamProfiles& upstream, double gamma,
                              bool axisymmetric) {
    if (!(m > 0.0)) throw std::invalid_argument("mass flux must be positive");
    const Bracket br = subsonic_bracket(kind, upstream, gamma);
    const double max_flux = inlet_flux(kind, br.lo, upstream, gamma, axisymmetric);
    if (m >= max_flux) {
        throw ChokedError("mass flux exceeds the maximal subsonic inlet flux " + std::to_string(max_flux),
                          m - max_flux);
    }
    const double min_flux = inlet_flux(kind, br.hi, upstream, gamma, axisymmetric);
    if (m <= min_flux) {
        throw InvalidUpstreamError("mass flux " + std::to_string(m) +
                                   " is below the flux at which the slowest streamline stagnates (" +
                                   std::to_string(min_flux) + ")");
    }
    double lo = br.lo;
    double hi = br.hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * hi || mid <= lo || mid >= hi) break;
        // flux decreases with the level
        if (inlet_flux(kind, mid, upstream, gamma, axisymmetric) > m) lo = mid;
        else hi = mid;
    }
    return FarFieldState(kind, gamma, axisymmetric, 0.5 * (lo + hi), upstream);
}

}  // namespace

FarFieldState far_field_full_euler(double m, const UpstreamProfiles& upstream, double gamma) {
    return solve_far_field(FarFieldKind::FullEuler, m, upstream, gamma, false);
}

namespace {

void require_flat_axis(const UpstreamProfiles& upstream, bool axisymmetric) {
    if (axisymmetric && std::abs(upstream.db(0.0)) > 1e-8 * (1.0 + std::abs(upstream.b(0.0)))) {
        throw InvalidUpstreamError("axisymmetric upstream Bernoulli function must have zero slope on the axis");
    }
}

}  // namespace

FarFieldState far_field_homentropic(double m, const UpstreamProfiles& upstream, double gamma, bool axisymmetric) {
    require_flat_axis(upstream, axisymmetric);
    return solve_far_field(FarFieldKind::Homentropic, m, upstream, gamma, axisymmetric);
}

FarFieldState far_field_incompressible(double m, const UpstreamProfiles& upstream, bool axisymmetric) {
    require_flat_axis(upstream, axisymmetric);
    if (!(m > 0.0)) throw std::invalid_argument("mass flux must be positive");
    const UpstreamRange r = upstream.range();
    const auto kind = FarFieldKind::Incompressible;
    double hi = r.b_min;
    if (inlet_flux(kind, hi, upstream, 1.0, axisymmetric) >= m) {
        throw std::invalid_argument("mass flux too small for the upstream Bernoulli variation");
    }
    double gap = 1.0;
    double lo = hi - gap;
    while (inlet_flux(kind, lo, upstream, 1.0, axisymmetric) < m) {
        gap *= 2.0;
        lo = hi - gap;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * (1.0 + std::abs(mid)) || mid <= lo || mid >= hi) break;
        if (inlet_flux(kind, mid, upstream, 1.0, axisymmetric) > m) lo = mid;
        else hi = mid;
    }
    return FarFieldState(kind, 1.0, axisymmetric, 0.5 * (lo + hi), upstream);
}

}  // namespace nozzle
