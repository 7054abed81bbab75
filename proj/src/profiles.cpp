#include "nozzle/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nozzle {

std::array<double, 3> evaluate_spec(const ProfileSpec& spec, double x) {
    struct Visitor {
        double x;
        std::array<double, 3> operator()(const ConstantProfile& c) const { return {c.value, 0.0, 0.0}; }
        std::array<double, 3> operator()(const PolynomialProfile& p) const {
            // Horner for value and both derivatives.
            double v = 0.0, d1 = 0.0, d2 = 0.0;
            for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) {
                d2 = d2 * x + 2.0 * d1;
                d1 = d1 * x + v;
                v = v * x + *it;
            }
            return {v, d1, d2};
        }
        std::array<double, 3> operator()(const BumpProfile& b) const {
            double v = 0.0, d1 = 0.0, d2 = 0.0;
            switch (b.shape) {
                case BumpShape::Parabola:
                    v = x * (1.0 - x);
                    d1 = 1.0 - 2.0 * x;
                    d2 = -2.0;
                    break;
                case BumpShape::Cosine: {
                    const double pi = std::numbers::pi;
                    v = 0.5 * (1.0 - std::cos(pi * x));
                    d1 = 0.5 * pi * std::sin(pi * x);
                    d2 = 0.5 * pi * pi * std::cos(pi * x);
                    break;
                }
                case BumpShape::Tanh: {
                    const double t = std::tanh((x - b.center) / b.width);
                    const double sech2 = 1.0 - t * t;
                    v = 0.5 * (1.0 + t);
                    d1 = 0.5 * sech2 / b.width;
                    d2 = -t * sech2 / (b.width * b.width);
                    break;
                }
            }
            return {b.base + b.delta * v, b.delta * d1, b.delta * d2};
        }
    };
    return std::visit(Visitor{x}, spec);
}

Profile::Profile(ProfileSpec spec) : spec_(std::move(spec)) {
    nodes_.resize(kNodes);
    v_.resize(kNodes);
    d1_.resize(kNodes);
    d2_.resize(kNodes);
    const int n = kNodes - 1;
    for (int k = 0; k <= n; ++k) {
        const double x = 0.5 * (1.0 - std::cos(std::numbers::pi * k / n));
        nodes_[k] = x;
        const auto f = evaluate_spec(spec_, x);
        v_[k] = f[0];
        d1_[k] = f[1];
        d2_[k] = f[2];
    }
    nodes_.front() = 0.0;
    nodes_.back() = 1.0;

    min_ = *std::min_element(v_.begin(), v_.end());
    max_ = *std::max_element(v_.begin(), v_.end());
    constexpr int kDense = 4096;
    for (int k = 0; k <= kDense; ++k) {
        const double y = value(static_cast<double>(k) / kDense);
        min_ = std::min(min_, y);
        max_ = std::max(max_, y);
    }
}

double Profile::hermite(const std::vector<double>& f, const std::vector<double>& df, double x) const {
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    k = std::min(k, nodes_.size() - 2);
    const double h = nodes_[k + 1] - nodes_[k];
    const double t = (x - nodes_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * f[k] + h10 * h * df[k] + h01 * f[k + 1] + h11 * h * df[k + 1];
}

double Profile::value(double x) const { return hermite(v_, d1_, x); }

double Profile::derivative(double x) const { return hermite(d1_, d2_, x); }

UpstreamRange UpstreamProfiles::range() const {
    UpstreamRange r;
    r.b_min = bernoulli.min();
    r.b_max = bernoulli.max();
    if (!(r.b_min > 0.0)) throw InvalidUpstreamError("min of upstream Bernoulli function must be positive");
    r.s_min = entropy ? entropy->min() : 1.0;
    r.s_max = entropy ? entropy->max() : 1.0;
    if (!(r.s_min > 0.0)) throw InvalidUpstreamError("min of upstream entropy function must be positive");

    r.bs_min = r.b_min * r.s_min;
    r.bs_max = r.b_max * r.s_max;
    if (entropy) {
        // Extremes of the product itself, sampled on a dense grid.
        r.bs_min = std::numeric_limits<double>::infinity();
        r.bs_max = -r.bs_min;
        constexpr int kDense = 4096;
        for (int k = 0; k <= kDense; ++k) {
            const double x = static_cast<double>(k) / kDense;
            const double bs = b(x) * s(x);
            r.bs_min = std::min(r.bs_min, bs);
            r.bs_max = std::max(r.bs_max, bs);
        }
    }
    return r;
}

UpstreamProfiles make_upstream(const ProfileSpec& bernoulli, const std::optional<ProfileSpec>& entropy) {
    UpstreamProfiles u;
    u.bernoulli = Profile(bernoulli);
    if (entropy) u.entropy = Profile(*entropy);
    (void)u.range();
    return u;
}

}  // namespace nozzle
