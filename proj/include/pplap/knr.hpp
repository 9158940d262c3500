#pragma once

// Kelvin-Nevanlinna-Royden auditing and the proof constructions of the
// comparison principles, transcribed to weighted graphs.
//
// A graph exhaustion is "not p-parabolic" when some field X has
//   (a) |X| in L^(p/(p-1)),  (b) (div X)_- in L^1,  (c) 0 < sum div X.
// knr_audit estimates the three quantities on each truncation and reads a
// verdict off their trends.
//
// Discrete chain rule: alpha(u - v) and grad h_T(u - v) are evaluated at
// nodes and averaged onto edges to build X and X_T. Sign and coercivity
// claims are checked through divided differences, for which the edgewise
// monotonicity inequality holds exactly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pplap/calculus.hpp"
#include "pplap/error.hpp"
#include "pplap/families.hpp"
#include "pplap/graph.hpp"
#include "pplap/solver.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

/// Piecewise-linear cutoff: 0 below A-1, 1 above A+1, slope 1/2 between.
struct CutoffAlpha {
    double A = 0.0;

    [[nodiscard]] double operator()(double t) const
    {
        if (t <= A - 1.0) return 0.0;
        if (t >= A + 1.0) return 1.0;
        return 0.5 * (t - A + 1.0);
    }

    /// Divided difference (alpha(t2) - alpha(t1)) / (t2 - t1); the right
    /// derivative when t1 == t2. Always in [0, 1/2].
    [[nodiscard]] double slope(double t1, double t2) const
    {
        if (t1 == t2) return (t1 >= A - 1.0 && t1 < A + 1.0) ? 0.5 : 0.0;
        return ((*this)(t2) - (*this)(t1)) / (t2 - t1);
    }
};

/// Convex C^1 function with bounded gradient:
///   h_T(x) = r^2/2 for r < T,  T r - T^2/2 for r >= T,   r = |x - C|.
/// Its gradient is the projection of x - C onto the closed ball of radius T.
class HTFunction {
public:
    HTFunction(double T, std::vector<double> center) : T_(T), C_(std::move(center))
    {
        if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T must be finite and > 0");
        if (C_.empty()) throw ValidationError("h_T base point must have dimension >= 1");
    }

    [[nodiscard]] double T() const noexcept { return T_; }
    [[nodiscard]] std::span<const double> center() const noexcept { return C_; }

    [[nodiscard]] double radius(VectorView x) const
    {
        detail::require_same_dim(x, C_);
        return detail::distance(x, C_);
    }

    [[nodiscard]] double operator()(VectorView x) const
    {
        const double r = radius(x);
        return r < T_ ? 0.5 * r * r : T_ * r - 0.5 * T_ * T_;
    }

    [[nodiscard]] std::vector<double> gradient(VectorView x) const
    {
        const double r = radius(x);
        const double s = r < T_ ? 1.0 : T_ / r;
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * (x[i] - C_[i]);
        return g;
    }

private:
    double T_;
    std::vector<double> C_;
};

/// grad h_T evaluated at every node of z.
inline NodeField ht_gradient_field(const HTFunction& h, const NodeField& z)
{
    NodeField psi(z.size(), z.dim());
    for (std::size_t a = 0; a < z.size(); ++a) {
        const auto g = h.gradient(z[a]);
        std::copy(g.begin(), g.end(), psi[a].begin());
    }
    return psi;
}

namespace detail {

inline void require_scalar(const NodeField& u, const char* what)
{
    if (u.dim() != 1) throw ValidationError(std::string(what) + " must be scalar-valued");
}

inline EdgeField flux_difference(const WeightedGraph& g, const NodeField& u, const NodeField& v, PExponent p)
{
    require_on(g, u);
    u.require_compatible(v);
    return p_flux(g, u, p) - p_flux(g, v, p);
}

}  // namespace detail

/// Divided differences of alpha(u - v) along each edge.
inline std::vector<double> alpha_edge_slopes(const WeightedGraph& g, const NodeField& u, const NodeField& v,
                                             const CutoffAlpha& alpha)
{
    detail::require_scalar(u, "u");
    u.require_compatible(v);
    std::vector<double> out(g.num_edges());
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        out[k] = alpha.slope(u.at(e.tail) - v.at(e.tail), u.at(e.head) - v.at(e.head));
    }
    return out;
}

/// X(e) = mean(alpha(u - v)) over the endpoints of e, times
/// (|du|^(p-2)du - |dv|^(p-2)dv)(e).
inline EdgeField build_X(const WeightedGraph& g, const NodeField& u, const NodeField& v, double A, PExponent p)
{
    detail::require_scalar(u, "u");
    detail::require_scalar(v, "v");
    const CutoffAlpha alpha{A};
    EdgeField x = detail::flux_difference(g, u, v, p);
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        x.at(k) *= 0.5 * (alpha(u.at(e.tail) - v.at(e.tail)) + alpha(u.at(e.head) - v.at(e.head)));
    }
    return x;
}

/// X_T(e) = < mean(grad h_T(u - v)) over the endpoints, (|du|^(p-2)du - |dv|^(p-2)dv)(e) >.
/// u and v are R^n-valued; the result is a scalar edge field.
inline EdgeField build_X_T(const WeightedGraph& g, const NodeField& u, const NodeField& v, std::vector<double> C,
                           double T, PExponent p)
{
    if (C.size() != u.dim()) throw ValidationError("base point C must have the target dimension");
    const HTFunction h(T, std::move(C));
    const NodeField psi = ht_gradient_field(h, u - v);
    const EdgeField flux = detail::flux_difference(g, u, v, p);
    EdgeField x(g.num_edges(), 1);
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        double s = 0.0;
        for (std::size_t c = 0; c < u.dim(); ++c) s += 0.5 * (psi.at(e.tail, c) + psi.at(e.head, c)) * flux.at(k, c);
        x.at(k) = s;
    }
    return x;
}

namespace detail {

inline void require_scalar_edge(const EdgeField& x)
{
    if (x.dim() != 1) throw ValidationError("divergence sums need a scalar edge field");
}

}  // namespace detail

/// sum_a mu_a max(-div X(a), 0), optionally over non-boundary nodes only.
inline double negative_part_mass(const WeightedGraph& g, const EdgeField& x, bool interior_only = false)
{
    detail::require_scalar_edge(x);
    const NodeField div = divergence(g, x);
    double s = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        if (interior_only && g.is_boundary(a)) continue;
        s += g.measure(a) * std::max(-div.at(a), 0.0);
    }
    return s;
}

/// sum_a mu_a div X(a), optionally over non-boundary nodes only. Over all
/// nodes this vanishes identically (discrete divergence theorem).
inline double total_divergence(const WeightedGraph& g, const EdgeField& x, bool interior_only = false)
{
    detail::require_scalar_edge(x);
    const NodeField div = divergence(g, x);
    double s = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        if (interior_only && g.is_boundary(a)) continue;
        s += g.measure(a) * div.at(a);
    }
    return s;
}

/// Bookkeeping for the scalar comparison argument on one graph.
struct CutoffAudit {
    /// sum_a mu_a alpha(u-v)(a) (Lap_p u - Lap_p v)(a)
    double source_pairing = 0.0;
    /// sum_e w_e alpha'_e <flux_u - flux_v, d(u - v)>, alpha'_e divided differences
    double slope_pairing = 0.0;
    /// mhck_constant(p) sum_e w_e alpha'_e |d(u - v)|^p
    double slope_bound = 0.0;
    /// |sum_a mu_a div X(a)|; zero up to rounding
    double divergence_total = 0.0;
    /// |source_pairing + slope_pairing|; zero up to rounding
    double identity_residual = 0.0;
    double scale = 0.0;
    /// max_e |X(e)|^(p/(p-1)) - 2^(1/(p-1)) (|du|^p + |dv|^p); must be <= 0
    double max_pointwise_excess = 0.0;
};

inline CutoffAudit audit_X(const WeightedGraph& g, const NodeField& u, const NodeField& v, double A, PExponent p)
{
    const CutoffAlpha alpha{A};
    const auto slopes = alpha_edge_slopes(g, u, v, alpha);
    const CoercivitySums cs = coercivity_sums(g, u, v, p, slopes);
    const NodeField res = p_laplacian(g, u, p) - p_laplacian(g, v, p);
    CutoffAudit out;
    double mag = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        const double t = g.measure(a) * alpha(u.at(a) - v.at(a)) * res.at(a);
        out.source_pairing += t;
        mag += std::abs(t);
    }
    out.slope_pairing = cs.pairing;
    out.slope_bound = cs.bound;
    const EdgeField x = build_X(g, u, v, A, p);
    out.divergence_total = std::abs(total_divergence(g, x));
    out.identity_residual = std::abs(out.source_pairing + out.slope_pairing);
    out.scale = std::max(mag, std::abs(cs.pairing)) + cs.scale;

    const double q = p.conjugate();
    const double c = std::pow(2.0, 1.0 / (p.value() - 1.0));
    const EdgeField du = edge_gradient(g, u);
    const EdgeField dv = edge_gradient(g, v);
    out.max_pointwise_excess = -std::numeric_limits<double>::infinity();
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const double lhs = std::pow(std::abs(x.at(k)), q);
        const double rhs = c * (std::pow(std::abs(du.at(k)), p.value()) + std::pow(std::abs(dv.at(k)), p.value()));
        out.max_pointwise_excess = std::max(out.max_pointwise_excess, lhs - rhs);
    }
    return out;
}

/// The estimates used for the map comparison at one truncation level T.
struct TruncationAudit {
    double T = 0.0;
    double norm_power = 0.0;          // sum_e w |X_T|^(p/(p-1))
    double norm_bound = 0.0;          // T^(p/(p-1)) 2^(1/(p-1)) (|du|_p^p + |dv|_p^p)
    double negative_mass = 0.0;       // sum_a mu_a (div X_T)_-
    double negative_mass_bound = 0.0; // 2 (|du|_p^p + |dv|_p^p)
    double tail_energy = 0.0;         // sum over edges touching {|u-v-C| >= T} of w (|du|^p + |dv|^p)
    double equation_defect = 0.0;     // sum_a mu_a |grad h_T(u-v)(a)| |Lap_p u - Lap_p v|(a)
    double inner_coercivity = 0.0;    // mhck_constant(p) sum over edges inside {|u-v-C| < T} of w |d(u-v)|^p
    double total_divergence = 0.0;    // sum_a mu_a div X_T(a), zero up to rounding
    bool norm_ok = false;
    bool negative_mass_ok = false;
    bool tail_bound_ok = false;       // negative_mass <= 2 tail_energy + equation_defect
    bool coercivity_ok = false;       // inner_coercivity <= 2 tail_energy + equation_defect
};

inline TruncationAudit audit_X_T(const WeightedGraph& g, const NodeField& u, const NodeField& v,
                                 const std::vector<double>& C, double T, PExponent p, double rel_tol = 1e-9)
{
    const HTFunction h(T, C);
    const NodeField z = u - v;
    const NodeField psi = ht_gradient_field(h, z);
    const EdgeField x = build_X_T(g, u, v, C, T, p);
    const EdgeField du = edge_gradient(g, u);
    const EdgeField dv = edge_gradient(g, v);
    const NodeField res = p_laplacian(g, u, p) - p_laplacian(g, v, p);
    const double q = p.value();
    const double c = mhck_constant(p);

    std::vector<double> r(g.num_nodes());
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) r[a] = h.radius(z[a]);

    TruncationAudit out;
    out.T = T;
    const double energy_sum = lq_sum(g, du, q) + lq_sum(g, dv, q);
    out.norm_power = lq_sum(g, x, p.conjugate());
    out.norm_bound = std::pow(T, p.conjugate()) * std::pow(2.0, 1.0 / (q - 1.0)) * energy_sum;
    out.negative_mass = negative_part_mass(g, x);
    out.negative_mass_bound = 2.0 * energy_sum;
    out.total_divergence = total_divergence(g, x);
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        out.equation_defect += g.measure(a) * detail::norm(psi[a]) * detail::norm(res[a]);
    }
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        const double w = e.weight;
        if (r[e.tail] >= T || r[e.head] >= T) {
            out.tail_energy += w * (std::pow(detail::norm(du[k]), q) + std::pow(detail::norm(dv[k]), q));
        } else {
            out.inner_coercivity += w * c * std::pow(detail::distance(du[k], dv[k]), q);
        }
    }
    const double slack = rel_tol * std::max(1.0, std::pow(T, p.conjugate()) * energy_sum + energy_sum);
    out.norm_ok = out.norm_power <= out.norm_bound + slack;
    out.negative_mass_ok = out.negative_mass <= out.negative_mass_bound + out.equation_defect + slack;
    out.tail_bound_ok = out.negative_mass <= 2.0 * out.tail_energy + out.equation_defect + slack;
    out.coercivity_ok = out.inner_coercivity <= 2.0 * out.tail_energy + out.equation_defect + slack;
    return out;
}

// ---------------------------------------------------------------------------
// Potentials on exhaustion truncations

/// Dirichlet values 0 on every boundary node of the truncation.
inline std::map<NodeIndex, std::vector<double>> grounded_boundary(const Truncation& t, std::size_t dim = 1)
{
    std::map<NodeIndex, std::vector<double>> out;
    for (NodeIndex a = 0; a < t.graph.num_nodes(); ++a) {
        if (t.graph.is_boundary(a)) out.emplace(a, std::vector<double>(dim, 0.0));
    }
    if (out.empty()) throw ValidationError("truncation has no boundary nodes");
    if (out.count(t.center)) throw ValidationError("truncation center lies on the boundary");
    return out;
}

/// p-Green potential: Lap_p G = -delta_center / mu_center inside, G = 0 on
/// the boundary sphere. G is positive with a maximum at the center.
inline SolveReport green_potential(const Truncation& t, PExponent p, SolverOptions opts = {})
{
    ProblemSpec spec;
    spec.graph = t.graph;
    spec.p = p;
    spec.source = NodeField(t.graph.num_nodes(), 1);
    spec.source.at(t.center) = -1.0 / t.graph.measure(t.center);
    spec.dirichlet = grounded_boundary(t);
    spec.options = opts;
    return solve(spec);
}

/// Equilibrium potential: 1 at the center, 0 on the boundary sphere,
/// p-harmonic elsewhere.
inline SolveReport equilibrium_potential(const Truncation& t, PExponent p, SolverOptions opts = {})
{
    ProblemSpec spec;
    spec.graph = t.graph;
    spec.p = p;
    spec.dirichlet = grounded_boundary(t);
    spec.dirichlet[t.center] = {1.0};
    spec.options = opts;
    return solve(spec);
}

/// cap_p(N) = sum_e w |du|^p of the equilibrium potential on truncation N.
inline double capacity(const ExhaustionFamily& family, PExponent p, int N)
{
    if (N < 2) throw ValidationError("capacity needs N >= 2");
    const Truncation t = family.truncate(N);
    const SolveReport rep = equilibrium_potential(t, p);
    if (!rep.converged) throw NumericalError("capacity solve did not converge at N = " + std::to_string(N));
    return p_energy_sum(t.graph, rep.solution, p);
}

/// Flux field of the p-Green potential, -|dG|^(p-2) dG; its divergence is
/// the unit point source at the center.
inline EdgeField green_flux_field(const Truncation& t, PExponent p)
{
    const SolveReport rep = green_potential(t, p);
    if (!rep.converged) throw NumericalError("Green potential did not converge at N = " + std::to_string(t.N));
    return -1.0 * p_flux(t.graph, rep.solution, p);
}

// ---------------------------------------------------------------------------
// KNR audit

enum class KnrVerdict { WitnessNonParabolic, FailsA, FailsB, FailsC, Undetermined };

inline const char* to_string(KnrVerdict v)
{
    switch (v) {
    case KnrVerdict::WitnessNonParabolic: return "WitnessNonParabolic";
    case KnrVerdict::FailsA: return "FailsA";
    case KnrVerdict::FailsB: return "FailsB";
    case KnrVerdict::FailsC: return "FailsC";
    case KnrVerdict::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

struct KnrThresholds {
    /// "bounded": relative growth over the last three truncations.
    double max_relative_growth = 0.05;
    /// "bounded away from 0": total interior divergence at every level.
    double min_total_divergence = 1e-6;
    /// Sequences whose last three entries are below this (relative to the
    /// largest total divergence, or 1) count as zero, hence bounded.
    double zero_floor = 1e-9;
};

struct KnrRow {
    int N = 0;
    std::size_t nodes = 0;
    double norm = 0.0;              // |X|_(p/(p-1))
    double negative_mass = 0.0;     // interior sum of mu (div X)_-
    double total_divergence = 0.0;  // interior sum of mu div X
};

struct KnrReport {
    std::string family;
    double p = 2.0;
    std::vector<KnrRow> rows;
    double norm_growth = 0.0;
    double negative_mass_growth = 0.0;
    double norm_extrapolated = 0.0;
    bool condition_a = false;
    bool condition_b = false;
    bool condition_c = false;
    KnrVerdict verdict = KnrVerdict::Undetermined;
    KnrThresholds thresholds{};
};

using FieldBuilder = std::function<EdgeField(const Truncation&)>;

namespace detail {

inline double last_three_growth(const std::vector<double>& xs, double floor)
{
    const std::size_t n = xs.size();
    const double a = xs[n - 3];
    const double b = xs[n - 1];
    if (std::max({std::abs(xs[n - 3]), std::abs(xs[n - 2]), std::abs(b)}) <= floor) return 0.0;
    if (std::abs(a) <= floor) return std::numeric_limits<double>::infinity();
    return (b - a) / std::abs(a);
}

}  // namespace detail

/// Evaluate conditions (a)-(c) on each truncation and classify the trend.
/// Divergence sums are taken over interior nodes; the boundary flux is
/// excluded.
inline KnrReport knr_audit(const ExhaustionFamily& family, std::vector<int> radii, const FieldBuilder& builder,
                           PExponent p, KnrThresholds th = {})
{
    if (radii.size() < 3) throw ValidationError("knr_audit needs at least 3 truncation levels");
    if (!std::is_sorted(radii.begin(), radii.end()) ||
        std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
        throw ValidationError("truncation radii must be strictly increasing");
    }
    KnrReport rep;
    rep.family = family.name();
    rep.p = p.value();
    rep.thresholds = th;
    std::vector<double> norms, negs;
    bool finite = true;
    double div_scale = 1.0;
    for (int N : radii) {
        const Truncation t = family.truncate(N);
        const EdgeField x = builder(t);
        require_on(t.graph, x);
        KnrRow row;
        row.N = N;
        row.nodes = t.graph.num_nodes();
        row.norm = lq_norm(t.graph, x, p.conjugate());
        row.negative_mass = negative_part_mass(t.graph, x, true);
        row.total_divergence = total_divergence(t.graph, x, true);
        finite = finite && std::isfinite(row.norm) && std::isfinite(row.negative_mass) &&
                 std::isfinite(row.total_divergence);
        div_scale = std::max(div_scale, std::abs(row.total_divergence));
        norms.push_back(row.norm);
        negs.push_back(row.negative_mass);
        rep.rows.push_back(row);
    }
    if (!finite) {
        rep.verdict = KnrVerdict::Undetermined;
        return rep;
    }
    const double floor = th.zero_floor * div_scale;
    rep.norm_growth = detail::last_three_growth(norms, floor);
    rep.negative_mass_growth = detail::last_three_growth(negs, floor);
    {
        const auto& r1 = rep.rows[rep.rows.size() - 2];
        const auto& r2 = rep.rows.back();
        rep.norm_extrapolated = (r2.N * r2.norm - r1.N * r1.norm) / (r2.N - r1.N);
    }
    rep.condition_a = rep.norm_growth <= th.max_relative_growth;
    rep.condition_b = rep.negative_mass_growth <= th.max_relative_growth;
    rep.condition_c = std::all_of(rep.rows.begin(), rep.rows.end(),
                                  [&](const KnrRow& r) { return r.total_divergence >= th.min_total_divergence; });
    if (!rep.condition_a) {
        rep.verdict = KnrVerdict::FailsA;
    } else if (!rep.condition_b) {
        rep.verdict = KnrVerdict::FailsB;
    } else if (!rep.condition_c) {
        rep.verdict = KnrVerdict::FailsC;
    } else {
        rep.verdict = KnrVerdict::WitnessNonParabolic;
    }
    return rep;
}

}  // namespace pplap
