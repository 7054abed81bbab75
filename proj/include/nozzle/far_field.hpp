#pragma once

// Subsonic-branch Bernoulli roots and the upstream asymptotic state fixed by the
// mass flux.

#include "nozzle/core.hpp"
#include "nozzle/profiles.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

/// No subsonic state exists for the requested data. `margin` is how far the sonic
/// state misses (Bernoulli excess for pointwise roots, flux excess for far fields).
class ChokedError : public std::runtime_error {
public:
    ChokedError(const std::string& what, double margin)
        : std::runtime_error(what + " (sonic margin " + std::to_string(margin) + ")"), margin_(margin) {}
    double margin() const { return margin_; }

private:
    double margin_;
};

struct RootOptions {
    int max_iterations = 200;
    double tolerance = 1e-14;  ///< absolute + relative bracket width
    bool newton_polish = true;
};

/// Density on the subsonic branch of  phi2/(2 rho^2) + gamma/(gamma-1) rho^(gamma-1) = B,
/// where phi2 = |rho u|^2.
double subsonic_root_homentropic(double phi2, double bernoulli, double gamma,
                                 const RootOptions& opt = {});

/// Pressure on the subsonic branch of
///   phi2/(2 p^(2/gamma)) + gamma p^((gamma-1)/gamma)/((gamma-1) S) = B,
/// where phi2 = |p^(1/gamma) u|^2.
double subsonic_root_full(double phi2, double bernoulli, double entropy, double gamma,
                          const RootOptions& opt = {});

enum class FarFieldKind { FullEuler, Homentropic, Incompressible };

/// Upstream state: a constant density weight a_- (p_-^(1/gamma), rho_- or 1) and the
/// velocity profile u_-(t), t in [0,1]. psi_-(t) integrates a_- u_-(t) (times t on
/// axisymmetric inlets) and is stored as a Hermite table with a monotone inverse.
class FarFieldState {
public:
    FarFieldState(FarFieldKind kind, double gamma, bool axisymmetric, double level,
                  UpstreamProfiles upstream);

    FarFieldKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    bool axisymmetric() const { return axisymmetric_; }

    /// p_- (full Euler), rho_- (homentropic) or the limit pressure head lambda (incompressible).
    double level() const { return level_; }
    double pressure() const;
    double density_weight() const { return weight_; }

    double velocity(double t) const;
    /// d psi_- / dt.
    double stream_density(double t) const;
    /// Mass flux of rho_- u_- across the inlet (r-weighted when axisymmetric).
    double mass_flux() const { return mass_flux_; }
    /// psi_-(1): the stream-function value on the upper wall.
    double stream_top() const { return psi_.back(); }

    double psi(double t) const;
    double psi_inverse(double psi) const;
    /// Mass flux carried between the lower wall and label t (S_- d psi_- integrated).
    double cumulative_mass(double t) const;

    const UpstreamProfiles& upstream() const { return upstream_; }

private:
    FarFieldKind kind_;
    double gamma_;
    bool axisymmetric_;
    double level_;
    double weight_;
    UpstreamProfiles upstream_;
    std::vector<double> t_;
    std::vector<double> psi_;
    std::vector<double> dpsi_;
    std::vector<double> mass_;
    std::vector<double> dmass_;
    double mass_flux_ = 0.0;
};

/// Inlet flux as a function of the far-field level; decreasing on the subsonic bracket.
double inlet_flux(FarFieldKind kind, double level, const UpstreamProfiles& upstream, double gamma,
                  bool axisymmetric);

/// Largest subsonic inlet flux (reached when the first streamline turns sonic).
double choking_flux(FarFieldKind kind, const UpstreamProfiles& upstream, double gamma, bool axisymmetric);

FarFieldState far_field_full_euler(double m, const UpstreamProfiles& upstream, double gamma);
FarFieldState far_field_homentropic(double m, const UpstreamProfiles& upstream, double gamma,
                                    bool axisymmetric);
inline FarFieldState far_field_axisym(double m, const UpstreamProfiles& upstream, double gamma) {
    return far_field_homentropic(m, upstream, gamma, true);
}
/// gamma = infinity limit: u_- = sqrt(2 (B_- - lambda)) with lambda fixed by the flux.
FarFieldState far_field_incompressible(double m, const UpstreamProfiles& upstream, bool axisymmetric);

}  // namespace nozzle
