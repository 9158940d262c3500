#pragma once

// Seeded property runs for the vector inequalities.
//
// Uniform and normal variates are derived from std::mt19937_64 by hand so the
// sample stream depends only on the seed, not on the standard library's
// distribution implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "pplap/error.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

class SampleStream {
public:
    explicit SampleStream(std::uint64_t seed) : rng_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t below(std::uint64_t n) { return rng_() % n; }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct InequalitySummary {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<double> p_values;
    int min_dim = 1;
    int max_dim = 1;
    /// min over samples of gap / (|x|^p + |y|^p + |x-y|^p)
    double min_lindqvist_relative = std::numeric_limits<double>::infinity();
    double min_mhck_relative = std::numeric_limits<double>::infinity();
    /// max |gap| / scale over the p = 2 samples (both gaps vanish identically)
    double max_p2_relative = 0.0;
    double min_classical_gap = std::numeric_limits<double>::infinity();
    /// max |pairing - pairing_expanded| / scale
    double max_pairing_mismatch = 0.0;
    std::size_t failures = 0;
    double tolerance = 1e-10;
};

namespace detail {

// Mixture of generic pairs and the degenerate configurations where the
// inequalities are tight or cancellation-prone.
inline void draw_pair(SampleStream& s, std::vector<double>& x, std::vector<double>& y)
{
    const double sx = std::pow(10.0, -3.0 + 6.0 * s.uniform());
    for (double& v : x) v = sx * s.normal();
    const auto kind = s.below(8);
    if (kind == 0) {
        std::fill(y.begin(), y.end(), 0.0);
    } else if (kind == 1) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = -x[i];
    } else if (kind == 2) {
        const double eps = std::pow(10.0, -8.0 * s.uniform());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * (1.0 + eps * s.normal());
    } else {
        const double sy = std::pow(10.0, -3.0 + 6.0 * s.uniform());
        for (double& v : y) v = sy * s.normal();
    }
}

}  // namespace detail

/// Evaluates lindqvist_gap, mhck_gap and classical_mhck_gap on `samples`
/// seeded pairs, cycling through p_values and dimensions min_dim..max_dim.
inline InequalitySummary sample_inequalities(const std::vector<double>& p_values, int min_dim, int max_dim,
                                             std::size_t samples, std::uint64_t seed, double tolerance = 1e-10)
{
    if (p_values.empty()) throw ValidationError("at least one p value is required");
    if (min_dim < 1 || max_dim < min_dim) throw ValidationError("invalid dimension range");
    std::vector<PExponent> ps;
    for (double p : p_values) ps.emplace_back(p);

    InequalitySummary out;
    out.seed = seed;
    out.samples = samples;
    out.p_values = p_values;
    out.min_dim = min_dim;
    out.max_dim = max_dim;
    out.tolerance = tolerance;

    SampleStream stream(seed);
    const auto nd = static_cast<std::size_t>(max_dim - min_dim + 1);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < samples; ++i) {
        const PExponent p = ps[i % ps.size()];
        const std::size_t d = static_cast<std::size_t>(min_dim) + (i / ps.size()) % nd;
        x.resize(d);
        y.resize(d);
        detail::draw_pair(stream, x, y);

        const double q = p.value();
        const double scale = std::pow(detail::norm(x), q) + std::pow(detail::norm(y), q) +
                             std::pow(detail::distance(x, y), q);
        if (scale == 0.0) continue;
        const double lg = lindqvist_gap(x, y, p) / scale;
        const double mg = mhck_gap(x, y, p) / scale;
        const double cg = classical_mhck_gap_closed_form(x, y);
        const double mismatch =
            std::abs(monotonicity_pairing(x, y, p) - monotonicity_pairing_expanded(x, y, p)) / scale;

        out.min_lindqvist_relative = std::min(out.min_lindqvist_relative, lg);
        out.min_mhck_relative = std::min(out.min_mhck_relative, mg);
        out.min_classical_gap = std::min(out.min_classical_gap, cg);
        out.max_pairing_mismatch = std::max(out.max_pairing_mismatch, mismatch);
        if (q == 2.0) out.max_p2_relative = std::max({out.max_p2_relative, std::abs(lg), std::abs(mg)});
        if (lg < -tolerance || mg < -tolerance || cg < 0.0) ++out.failures;
    }
    return out;
}

}  // namespace pplap
