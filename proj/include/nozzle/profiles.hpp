#pragma once

// Upstream Bernoulli / entropy profiles on [0,1].

#include "nozzle/core.hpp"

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace nozzle {

struct ConstantProfile {
    double value = 1.0;
};

/// c0 + c1 x + c2 x^2 + ...
struct PolynomialProfile {
    std::vector<double> coefficients;
};

enum class BumpShape {
    Parabola,  ///< x (1 - x)
    Cosine,    ///< (1 - cos(pi x)) / 2
    Tanh,      ///< (1 + tanh((x - center) / width)) / 2
};

/// base + delta * bump(x)
struct BumpProfile {
    double base = 1.0;
    double delta = 0.0;
    BumpShape shape = BumpShape::Parabola;
    double center = 0.5;
    double width = 0.1;
};

using ProfileSpec = std::variant<ConstantProfile, PolynomialProfile, BumpProfile>;

/// Analytic value and first two derivatives of a profile spec.
std::array<double, 3> evaluate_spec(const ProfileSpec& spec, double x);

/// A profile tabulated at Chebyshev points of [0,1], evaluated by piecewise cubic
/// Hermite interpolation of the analytic values and derivatives.
class Profile {
public:
    static constexpr int kNodes = 257;

    Profile() = default;
    explicit Profile(ProfileSpec spec);

    double value(double x) const;
    double derivative(double x) const;

    double min() const { return min_; }
    double max() const { return max_; }
    const ProfileSpec& spec() const { return spec_; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    double hermite(const std::vector<double>& f, const std::vector<double>& df, double x) const;

    ProfileSpec spec_;
    std::vector<double> nodes_;
    std::vector<double> v_;
    std::vector<double> d1_;
    std::vector<double> d2_;
    double min_ = 0.0;
    double max_ = 0.0;
};

struct UpstreamProfiles {
    Profile bernoulli;
    std::optional<Profile> entropy;  ///< absent for homentropic data (S = 1)

    double s(double x) const { return entropy ? entropy->value(x) : 1.0; }
    double ds(double x) const { return entropy ? entropy->derivative(x) : 0.0; }
    double b(double x) const { return bernoulli.value(x); }
    double db(double x) const { return bernoulli.derivative(x); }

    /// Extremes over [0,1]; throws InvalidUpstreamError on nonpositive B or S.
    UpstreamRange range() const;
};

UpstreamProfiles make_upstream(const ProfileSpec& bernoulli,
                               const std::optional<ProfileSpec>& entropy = std::nullopt);

}  // namespace nozzle
