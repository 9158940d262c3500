#pragma once

// Rotationally symmetric model manifolds dr^2 + sigma(r)^2 dtheta^2 and the
// volume-growth test for p-parabolicity:
//
//   M is p-parabolic provided  (1 / vol(dB_r))^(1/(p-1))  is not integrable at +infinity.
//
// The test is one-directional, so a convergent integral yields Inconclusive.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pplap/error.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

/// sigma(r) = r^k
struct PowerProfile {
    double k = 1.0;
};

/// sigma(r) = exp(a r)
struct ExponentialProfile {
    double a = 1.0;
};

/// Sampled warping function, interpolated linearly in log-log coordinates.
struct TabulatedProfile {
    std::vector<std::pair<double, double>> samples;  // (r, sigma), r strictly increasing
};

class ModelProfile {
public:
    using Kind = std::variant<PowerProfile, ExponentialProfile, TabulatedProfile>;

    ModelProfile(Kind kind) : kind_(std::move(kind)) { validate(); }  // NOLINT implicit

    static ModelProfile power(double k) { return ModelProfile(PowerProfile{k}); }
    static ModelProfile exponential(double a) { return ModelProfile(ExponentialProfile{a}); }
    static ModelProfile tabulated(std::vector<std::pair<double, double>> samples)
    {
        return ModelProfile(TabulatedProfile{std::move(samples)});
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

    /// Smallest admissible radius.
    [[nodiscard]] double domain_min() const
    {
        if (const auto* t = std::get_if<TabulatedProfile>(&kind_)) return t->samples.front().first;
        if (std::holds_alternative<ExponentialProfile>(kind_)) return 0.0;
        return std::numeric_limits<double>::min();
    }

    /// Largest admissible radius (+inf for analytic profiles).
    [[nodiscard]] double domain_max() const
    {
        if (const auto* t = std::get_if<TabulatedProfile>(&kind_)) return t->samples.back().first;
        return std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] bool in_domain(double r) const { return r >= domain_min() && r <= domain_max(); }

    /// log sigma(r). Computed in log space so that exponential profiles do
    /// not overflow at large radii.
    [[nodiscard]] double log_sigma(double r) const
    {
        if (!in_domain(r)) {
            throw ValidationError("radius " + std::to_string(r) + " outside profile domain");
        }
        return std::visit(
            [r](const auto& prof) -> double {
                using T = std::decay_t<decltype(prof)>;
                if constexpr (std::is_same_v<T, PowerProfile>) {
                    return prof.k * std::log(r);
                } else if constexpr (std::is_same_v<T, ExponentialProfile>) {
                    return prof.a * r;
                } else {
                    const auto& s = prof.samples;
                    auto hi = std::lower_bound(s.begin(), s.end(), r,
                                               [](const auto& sample, double v) { return sample.first < v; });
                    if (hi == s.end()) return std::log(s.back().second);
                    if (hi->first == r || hi == s.begin()) return std::log(hi->second);
                    auto lo = std::prev(hi);
                    const double t = (std::log(r) - std::log(lo->first)) / (std::log(hi->first) - std::log(lo->first));
                    return (1.0 - t) * std::log(lo->second) + t * std::log(hi->second);
                }
            },
            kind_);
    }

    [[nodiscard]] double sigma(double r) const { return std::exp(log_sigma(r)); }

private:
    void validate() const
    {
        if (const auto* t = std::get_if<TabulatedProfile>(&kind_)) {
            if (t->samples.size() < 2) throw ValidationError("tabulated profile needs at least 2 samples");
            for (std::size_t i = 0; i < t->samples.size(); ++i) {
                const auto [r, s] = t->samples[i];
                if (!(r > 0.0) || !(s > 0.0) || !std::isfinite(r) || !std::isfinite(s)) {
                    throw ValidationError("tabulated profile samples must have r > 0 and sigma > 0");
                }
                if (i > 0 && !(r > t->samples[i - 1].first)) {
                    throw ValidationError("tabulated profile radii must be strictly increasing");
                }
            }
        } else if (const auto* pw = std::get_if<PowerProfile>(&kind_)) {
            if (!std::isfinite(pw->k)) throw ValidationError("power exponent must be finite");
        } else if (const auto* ex = std::get_if<ExponentialProfile>(&kind_)) {
            if (!std::isfinite(ex->a)) throw ValidationError("exponential rate must be finite");
        }
    }

    Kind kind_;
};

/// Area of the unit sphere S^(m-1) in R^m.
inline double unit_sphere_area(int m)
{
    const double h = 0.5 * m;
    return 2.0 * std::pow(std::numbers::pi, h) / boost::math::tgamma(h);
}

inline void require_model_dimension(int m)
{
    if (m < 2) throw ValidationError("model dimension m must be >= 2");
}

/// log vol_{m-1}(dB_r) = log(omega_{m-1}) + (m-1) log sigma(r).
inline double log_boundary_volume(const ModelProfile& profile, int m, double r)
{
    require_model_dimension(m);
    return std::log(unit_sphere_area(m)) + (m - 1) * profile.log_sigma(r);
}

inline double boundary_volume(const ModelProfile& profile, int m, double r)
{
    return std::exp(log_boundary_volume(profile, m, r));
}

/// (vol_{m-1}(dB_r))^(-1/(p-1)).
inline double parabolicity_integrand(const ModelProfile& profile, int m, PExponent p, double r)
{
    return std::exp(-log_boundary_volume(profile, m, r) / (p.value() - 1.0));
}

struct QuadratureOptions {
    double relative_tolerance = 1e-9;
    unsigned max_depth = 30;
};

/// Partial integral of the parabolicity integrand over [r0, R]; R may be +inf.
///
/// Integrates in s = log r, where power-like integrands become smooth and
/// slowly varying, with adaptive Gauss-Kronrod (31 points).
inline double parabolicity_integral(const ModelProfile& profile, int m, PExponent p, double r0, double R,
                                    QuadratureOptions opts = {})
{
    require_model_dimension(m);
    if (!(r0 > 0.0)) throw ValidationError("lower radius must be positive");
    if (R < r0) throw ValidationError("upper radius must be >= lower radius");
    if (!profile.in_domain(r0) || (std::isfinite(R) && !profile.in_domain(R)) ||
        (!std::isfinite(R) && std::isfinite(profile.domain_max()))) {
        throw ValidationError("integration interval outside profile domain");
    }
    if (R == r0) return 0.0;

    const double inv = 1.0 / (p.value() - 1.0);
    bool non_finite = false;
    auto f = [&](double s) {
        // exp(log r) can land one ulp outside [r0, R]
        const double r = std::clamp(std::exp(s), r0, R);
        if (!std::isfinite(r)) return 0.0;
        const double v = std::exp(s - log_boundary_volume(profile, m, r) * inv);
        if (!std::isfinite(v)) non_finite = true;
        return std::isfinite(v) ? v : 0.0;
    };
    const double a = std::log(r0);
    const double b = std::isfinite(R) ? std::log(R) : std::numeric_limits<double>::infinity();
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, opts.max_depth, opts.relative_tolerance, &err);
    if (non_finite || !std::isfinite(value)) {
        throw NumericalError("quadrature failed: non-finite integrand on [" + std::to_string(r0) + ", " +
                             std::to_string(R) + "]");
    }
    return value;
}

enum class ParabolicityClass { Parabolic, Inconclusive };

inline const char* to_string(ParabolicityClass c)
{
    return c == ParabolicityClass::Parabolic ? "Parabolic" : "Inconclusive";
}

struct ParabolicityVerdict {
    ParabolicityClass verdict = ParabolicityClass::Inconclusive;
    double tail_exponent_estimate = 0.0;
    std::vector<std::pair<double, double>> integral_values;  // (R, integral over [r0, R])
    double r0 = 0.0;
    double r_max = 0.0;
    double delta = 0.0;
};

struct ClassifyOptions {
    double r0 = 1.0;
    double r_max = 1e6;
    double delta = 1e-3;
    int fit_points = 33;
    QuadratureOptions quadrature{};
};

/// Least-squares slope of log(integrand) against log(r) over the last
/// decade of [r0, r_max]. A slope >= -1 - delta means a divergent tail.
inline ParabolicityVerdict classify_model(const ModelProfile& profile, int m, PExponent p, ClassifyOptions opts = {})
{
    require_model_dimension(m);
    if (std::isfinite(profile.domain_max())) {
        opts.r0 = std::max(opts.r0, profile.domain_min());
        opts.r_max = std::min(opts.r_max, profile.domain_max());
        if (opts.r_max < 10.0 * opts.r0) {
            throw ValidationError("tail estimation impossible: tabulated profile spans less than one decade");
        }
    }
    if (!(opts.r0 > 0.0) || !(opts.r_max >= 10.0 * opts.r0)) {
        throw ValidationError("classification range must satisfy 0 < r0 and r_max >= 10 r0");
    }

    ParabolicityVerdict out;
    out.r0 = opts.r0;
    out.r_max = opts.r_max;
    out.delta = opts.delta;

    // Partial integrals on a decade grid, accumulated piecewise.
    double acc = 0.0;
    double lo = opts.r0;
    out.integral_values.emplace_back(lo, 0.0);
    while (lo < opts.r_max) {
        const double hi = std::min(lo * 10.0, opts.r_max);
        acc += parabolicity_integral(profile, m, p, lo, hi, opts.quadrature);
        out.integral_values.emplace_back(hi, acc);
        lo = hi;
    }

    const double inv = 1.0 / (p.value() - 1.0);
    const double s_hi = std::log(opts.r_max);
    const double s_lo = s_hi - std::log(10.0);
    const int n = std::max(opts.fit_points, 3);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / (n - 1);
        const double r = std::clamp(std::exp(s), opts.r0, opts.r_max);
        const double y = -log_boundary_volume(profile, m, r) * inv;
        sx += s;
        sy += y;
        sxx += s * s;
        sxy += s * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.tail_exponent_estimate = slope;
    out.verdict = slope >= -1.0 - opts.delta ? ParabolicityClass::Parabolic : ParabolicityClass::Inconclusive;
    return out;
}

}  // namespace pplap
