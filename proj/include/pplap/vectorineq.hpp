#pragma once

// Pointwise vector inequalities behind the comparison principles.
//
// Every inequality is exposed as a signed "gap" (left side minus right
// side) so that nonnegativity can be tested directly. Nothing is clamped.

#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "pplap/error.hpp"

namespace pplap {

/// Exponent of the p-Laplacian. The whole toolkit works with p >= 2.
class PExponent {
public:
    explicit PExponent(double p) : p_(p)
    {
        if (!std::isfinite(p) || p < 2.0) {
            throw ValidationError("p must be a finite real >= 2, got " + std::to_string(p));
        }
    }

    [[nodiscard]] double value() const noexcept { return p_; }

    /// Hölder conjugate p/(p-1).
    [[nodiscard]] double conjugate() const noexcept { return p_ / (p_ - 1.0); }

private:
    double p_;
};

using VectorView = std::span<const double>;

namespace detail {

inline void require_same_dim(VectorView x, VectorView y)
{
    if (x.size() != y.size()) {
        throw ValidationError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()));
    }
    if (x.empty()) throw ValidationError("vectors must have dimension >= 1");
}

inline double dot(VectorView x, VectorView y)
{
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

inline double norm(VectorView x) { return std::sqrt(dot(x, x)); }

inline double distance(VectorView x, VectorView y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// |t|^(p-2) for t >= 0; 0^0 = 1, which is harmless since it only ever
// multiplies a vector that vanishes with t.
inline double weight(double t, double p) { return std::pow(t, p - 2.0); }

}  // namespace detail

/// 2 / (p (2^(p-1) - 1)), the coercivity constant of the p-monotonicity
/// inequality. Equals 1 at p = 2 and decreases with p.
inline double mhck_constant(PExponent p)
{
    const double q = p.value();
    return 2.0 / (q * (std::pow(2.0, q - 1.0) - 1.0));
}

/// |x|^p + (p-1)|y|^p - p|y|^(p-2)<x,y> - |x-y|^p / (2^(p-1) - 1).
/// Nonnegative for p >= 2; identically zero when p = 2.
inline double lindqvist_gap(VectorView x, VectorView y, PExponent p)
{
    detail::require_same_dim(x, y);
    const double q = p.value();
    const double nx = detail::norm(x);
    const double ny = detail::norm(y);
    const double lhs = std::pow(nx, q) + (q - 1.0) * std::pow(ny, q);
    const double rhs = q * detail::weight(ny, q) * detail::dot(x, y) +
                       std::pow(detail::distance(x, y), q) / (std::pow(2.0, q - 1.0) - 1.0);
    return lhs - rhs;
}

/// <|x|^(p-2)x - |y|^(p-2)y, x - y>, computed directly.
inline double monotonicity_pairing(VectorView x, VectorView y, PExponent p)
{
    detail::require_same_dim(x, y);
    const double q = p.value();
    const double wx = detail::weight(detail::norm(x), q);
    const double wy = detail::weight(detail::norm(y), q);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (wx * x[i] - wy * y[i]) * (x[i] - y[i]);
    return s;
}

/// Same pairing through the expansion |x|^p + |y|^p - <x,y>(|x|^(p-2) + |y|^(p-2)).
/// Kept as an independent route for cross-checking monotonicity_pairing.
inline double monotonicity_pairing_expanded(VectorView x, VectorView y, PExponent p)
{
    detail::require_same_dim(x, y);
    const double q = p.value();
    const double nx = detail::norm(x);
    const double ny = detail::norm(y);
    return std::pow(nx, q) + std::pow(ny, q) -
           detail::dot(x, y) * (detail::weight(nx, q) + detail::weight(ny, q));
}

/// monotonicity_pairing(x, y, p) - mhck_constant(p) |x-y|^p.
inline double mhck_gap(VectorView x, VectorView y, PExponent p)
{
    return monotonicity_pairing(x, y, p) -
           mhck_constant(p) * std::pow(detail::distance(x, y), p.value());
}

/// Gap of the mean-curvature-operator inequality
///   <Tx - Ty, x - y> >= (W_x + W_y)/2 |Tx - Ty|^2,  T(x) = x / W_x,  W_x = sqrt(1 + |x|^2).
///
/// Note: the gap vanishes whenever |x| = |y|, not only at x = y.
/// See classical_mhck_gap_closed_form.
inline double classical_mhck_gap(VectorView x, VectorView y)
{
    detail::require_same_dim(x, y);
    const double wx = std::sqrt(1.0 + detail::dot(x, x));
    const double wy = std::sqrt(1.0 + detail::dot(y, y));
    double pairing = 0.0;
    double diff2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] / wx - y[i] / wy;
        pairing += d * (x[i] - y[i]);
        diff2 += d * d;
    }
    return pairing - 0.5 * (wx + wy) * diff2;
}

/// Cancellation-free form of classical_mhck_gap:
///   (W_x - W_y)^2 (W_x + W_y) / (2 W_x^2 W_y^2).
inline double classical_mhck_gap_closed_form(VectorView x, VectorView y)
{
    detail::require_same_dim(x, y);
    const double nx2 = detail::dot(x, x);
    const double ny2 = detail::dot(y, y);
    const double wx = std::sqrt(1.0 + nx2);
    const double wy = std::sqrt(1.0 + ny2);
    // W_x - W_y = (|x|^2 - |y|^2) / (W_x + W_y)
    const double dw = (nx2 - ny2) / (wx + wy);
    return dw * dw * (wx + wy) / (2.0 * wx * wx * wy * wy);
}

}  // namespace pplap
