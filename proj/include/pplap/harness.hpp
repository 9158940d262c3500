#pragma once

// Comparison experiments on exhaustion families.
//
// Each mode builds u and v on every truncation N, measures the oscillation
// of u - v over an inner ball, and audits the discrete estimates that drive
// the comparison argument:
//
//   scalar          Lap_p u = Lap_p v (+ optional nonnegative bump), u = v + shift on the sphere
//   map             same for R^n-valued maps, plus the X_T estimates for T_n = 2^n
//   constancy       v = 0, u p-harmonic with decaying boundary data
//   counterexample  v = 0, u = -G / G(center) with G the p-Green potential
//
// "Finite p-energy" is read as energies bounded uniformly in N; every row
// carries the energies so the proxy can be audited.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pplap/calculus.hpp"
#include "pplap/error.hpp"
#include "pplap/families.hpp"
#include "pplap/graph.hpp"
#include "pplap/knr.hpp"
#include "pplap/solver.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

enum class ExperimentMode { Scalar, Map, Constancy, Counterexample };

inline const char* to_string(ExperimentMode m)
{
    switch (m) {
    case ExperimentMode::Scalar: return "scalar";
    case ExperimentMode::Map: return "map";
    case ExperimentMode::Constancy: return "constancy";
    case ExperimentMode::Counterexample: return "counterexample";
    }
    return "unknown";
}

enum class BoundaryMode { Matched, Gauge };

inline const char* to_string(BoundaryMode m) { return m == BoundaryMode::Matched ? "matched" : "gauge"; }

enum class TrendConclusion { OscillationVanishing, OscillationPersistent };

inline const char* to_string(TrendConclusion c)
{
    return c == TrendConclusion::OscillationVanishing ? "oscillation-vanishing" : "oscillation-persistent";
}

struct ExperimentSpec {
    ExhaustionFamily family = ExhaustionFamily::path();
    double p = 2.0;
    ExperimentMode mode = ExperimentMode::Scalar;
    /// bump | slope | green | zero | constant | file
    std::string v_recipe = "bump";
    /// scalar/map: solve | same.  constancy: decaying | constant | equilibrium.
    /// counterexample: green.
    std::string u_recipe = "solve";
    std::vector<int> radii;
    std::size_t target_dim = 1;
    /// Constant added to u's constraint data; empty means zero.
    std::vector<double> shift;
    /// Scalar mode: f = Lap_p v + source_bump * bump, which makes Lap_p u >= Lap_p v.
    double source_bump = 0.0;
    BoundaryMode boundary = BoundaryMode::Matched;
    double bump_radius = 3.0;
    double bump_amplitude = 1.0;
    /// Inner-ball radius for osc; negative selects the default (N/2 for
    /// scalar/map, half the smallest N for constancy/counterexample).
    int inner_radius = -1;
    double osc_tolerance = 1e-6;
    double decay_factor = 0.9;
    double coercivity_tolerance = 1e-9;
    /// Minimum number of levels T_n = 2^n audited in map mode.
    int min_levels = 6;
    bool probe_capacity = true;
    /// For the "file" recipe: node fields keyed by N.
    std::map<int, NodeField> v_fields;
    std::map<int, NodeField> u_fields;
    SolverOptions solver{};
};

struct LevelRow {
    int n = 0;
    TruncationAudit audit;
    /// 2 * tail_energy < 1/n
    bool tail_criterion = false;
};

struct ComparisonRow {
    int N = 0;
    std::size_t nodes = 0;
    int inner_radius = 0;
    double osc = 0.0;
    std::vector<double> A;
    double energy_u = 0.0;
    double energy_v = 0.0;
    bool solved = false;
    bool solver_converged = true;
    std::size_t solver_iterations = 0;
    double solver_residual = 0.0;
    /// summation-by-parts residual for phi = u - v, X = flux_u - flux_v, relative
    double sbp_residual = 0.0;
    double coercivity_pairing = 0.0;
    double coercivity_bound = 0.0;
    double coercivity_scale = 0.0;
    bool coercivity_ok = true;
    /// scalar mode: |sum mu alpha (Lap_p u - Lap_p v) + sum w alpha' <...>|, relative
    double identity_residual = 0.0;
    /// min over interior nodes of Lap_p u - Lap_p v
    double min_interior_plap_gap = 0.0;
    std::optional<double> capacity;
    std::vector<LevelRow> levels;
};

struct ComparisonReport {
    ExperimentMode mode = ExperimentMode::Scalar;
    std::string family;
    double p = 2.0;
    std::size_t target_dim = 1;
    std::string u_recipe;
    std::string v_recipe;
    BoundaryMode boundary = BoundaryMode::Matched;
    std::vector<ComparisonRow> rows;
    TrendConclusion conclusion = TrendConclusion::OscillationPersistent;
    double observed_decay_factor = 0.0;
    std::optional<bool> parabolic_at_scale;
    /// every audit (coercivity, solver, X_T bounds) passed
    bool checks_ok = true;
    double osc_tolerance = 1e-6;
    double decay_factor = 0.9;
};

/// Geometric decay factor of the last three entries, sqrt(x[-1] / x[-3]).
inline double trend_factor(const std::vector<double>& xs)
{
    if (xs.size() < 3) throw ValidationError("trend needs at least 3 values");
    const double a = xs[xs.size() - 3];
    const double b = xs.back();
    if (a <= 0.0) return b <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(std::max(b, 0.0) / a);
}

/// Vanishing when the last three entries are all <= floor, or when the
/// geometric decay factor is below max_factor.
inline TrendConclusion classify_trend(const std::vector<double>& osc, double floor, double max_factor)
{
    if (osc.size() < 3) throw ValidationError("trend needs at least 3 values");
    const auto last = std::max({osc[osc.size() - 3], osc[osc.size() - 2], osc.back()});
    if (last <= floor || trend_factor(osc) < max_factor) return TrendConclusion::OscillationVanishing;
    return TrendConclusion::OscillationPersistent;
}

namespace detail {

inline double bump_profile(double s) { return s < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0; }

inline double coord_distance(const LatticePoint& x, const LatticePoint& c)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += double(x[i] - c[i]) * double(x[i] - c[i]);
    return std::sqrt(s);
}

inline NodeField normalized_green(const Truncation& t, PExponent p, const SolverOptions& opts)
{
    const SolveReport rep = green_potential(t, p, opts);
    if (!rep.converged) throw NumericalError("Green potential did not converge at N = " + std::to_string(t.N));
    const double g0 = rep.solution.at(t.center);
    return (-1.0 / g0) * rep.solution;
}

inline NodeField make_recipe(const std::string& recipe, const Truncation& t, std::size_t dim, const ExperimentSpec& spec,
                             const std::map<int, NodeField>& files)
{
    const std::size_t n = t.graph.num_nodes();
    NodeField out(n, dim);
    if (recipe == "zero") return out;
    if (recipe == "constant") {
        for (NodeIndex a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < dim; ++k) out.at(a, k) = spec.bump_amplitude * double(k + 1);
        }
        return out;
    }
    if (recipe == "bump") {
        for (NodeIndex a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < dim; ++k) {
                const LatticePoint c{static_cast<int>(k), 0, 0};
                out.at(a, k) =
                    spec.bump_amplitude * double(k + 1) * bump_profile(coord_distance(t.coords[a], c) / spec.bump_radius);
            }
        }
        return out;
    }
    if (recipe == "slope") {
        for (NodeIndex a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < dim; ++k) out.at(a, k) = spec.bump_amplitude * double(t.coords[a][k % 3]);
        }
        return out;
    }
    if (recipe == "green") {
        const NodeField g = normalized_green(t, PExponent(spec.p), spec.solver);
        for (NodeIndex a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < dim; ++k) out.at(a, k) = double(k + 1) * g.at(a);
        }
        return out;
    }
    if (recipe == "file") {
        auto it = files.find(t.N);
        if (it == files.end()) throw ValidationError("no field file for N = " + std::to_string(t.N));
        if (it->second.size() != n || it->second.dim() != dim) {
            throw ValidationError("field file for N = " + std::to_string(t.N) + " has the wrong shape");
        }
        return it->second;
    }
    throw ValidationError("unknown field recipe '" + recipe + "'");
}

inline double inner_oscillation(const Truncation& t, const NodeField& z, double radius)
{
    // max - min per component; the oscillation of a map is the largest
    // componentwise oscillation.
    double osc = 0.0;
    for (std::size_t k = 0; k < z.dim(); ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (NodeIndex a = 0; a < t.graph.num_nodes(); ++a) {
            if (t.radius[a] > radius) continue;
            lo = std::min(lo, z.at(a, k));
            hi = std::max(hi, z.at(a, k));
        }
        osc = std::max(osc, hi - lo);
    }
    return osc;
}

inline void fill_common(ComparisonRow& row, const Truncation& t, const NodeField& u, const NodeField& v, PExponent p,
                        const ExperimentSpec& spec, double inner)
{
    const WeightedGraph& g = t.graph;
    const NodeField z = u - v;
    row.N = t.N;
    row.nodes = g.num_nodes();
    row.inner_radius = static_cast<int>(inner);
    row.osc = inner_oscillation(t, z, inner);
    row.A.assign(z[t.center].begin(), z[t.center].end());
    row.energy_u = p_energy(g, u, p);
    row.energy_v = p_energy(g, v, p);

    const EdgeField flux = p_flux(g, u, p) - p_flux(g, v, p);
    const double sbp_scale = summation_by_parts_scale(g, z, flux);
    row.sbp_residual = sbp_scale > 0.0 ? summation_by_parts_residual(g, z, flux) / sbp_scale : 0.0;

    const NodeField gap = p_laplacian(g, u, p) - p_laplacian(g, v, p);
    row.min_interior_plap_gap = std::numeric_limits<double>::infinity();
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        if (g.is_boundary(a)) continue;
        for (double x : gap[a]) row.min_interior_plap_gap = std::min(row.min_interior_plap_gap, x);
    }

    if (u.dim() == 1) {
        const CutoffAudit audit = audit_X(g, u, v, row.A[0], p);
        row.coercivity_pairing = audit.slope_pairing;
        row.coercivity_bound = audit.slope_bound;
        row.identity_residual = audit.scale > 0.0 ? audit.identity_residual / audit.scale : 0.0;
        row.coercivity_scale = audit.scale;
    } else {
        const CoercivitySums cs = coercivity_sums(g, u, v, p);
        row.coercivity_pairing = cs.pairing;
        row.coercivity_bound = cs.bound;
        row.coercivity_scale = cs.scale;
    }
    row.coercivity_ok = row.coercivity_pairing >=
                        row.coercivity_bound - spec.coercivity_tolerance * std::max(row.coercivity_scale, 1e-300);
}

inline std::vector<double> shift_or_zero(const ExperimentSpec& spec, std::size_t dim)
{
    if (spec.shift.empty()) return std::vector<double>(dim, 0.0);
    if (spec.shift.size() != dim) throw ValidationError("shift must have the target dimension");
    return spec.shift;
}

inline double default_inner_radius(const ExperimentSpec& spec, int N)
{
    if (spec.inner_radius >= 0) return spec.inner_radius;
    if (spec.mode == ExperimentMode::Scalar || spec.mode == ExperimentMode::Map) return N / 2;
    return spec.radii.front() / 2;
}

// u solving Lap_p u = f with matched far-field data or a gauge pin.
inline SolveReport solve_matched(const Truncation& t, const NodeField& v, const NodeField& f, PExponent p,
                                 const std::vector<double>& shift, const ExperimentSpec& spec)
{
    ProblemSpec ps;
    ps.graph = t.graph;
    ps.p = p;
    ps.dim = v.dim();
    ps.source = f;
    ps.options = spec.solver;
    auto shifted = [&](NodeIndex a) {
        std::vector<double> val(v[a].begin(), v[a].end());
        for (std::size_t k = 0; k < val.size(); ++k) val[k] += shift[k];
        return val;
    };
    if (spec.boundary == BoundaryMode::Matched) {
        for (NodeIndex a = 0; a < t.graph.num_nodes(); ++a) {
            if (t.graph.is_boundary(a)) ps.dirichlet.emplace(a, shifted(a));
        }
        if (ps.dirichlet.empty()) throw ValidationError("matched boundary mode needs boundary nodes");
    } else {
        ps.gauge = GaugePin{t.center, shifted(t.center)};
    }
    return solve(ps);
}

inline void finish(ComparisonReport& rep, const ExperimentSpec& spec, const std::vector<double>& capacities)
{
    std::vector<double> osc;
    for (const auto& r : rep.rows) osc.push_back(r.osc);
    rep.conclusion = classify_trend(osc, spec.osc_tolerance, spec.decay_factor);
    rep.observed_decay_factor = trend_factor(osc);
    if (capacities.size() == rep.rows.size() && !capacities.empty()) {
        rep.parabolic_at_scale = trend_factor(capacities) < spec.decay_factor;
    }
    for (const auto& r : rep.rows) {
        bool ok = r.coercivity_ok && r.solver_converged;
        for (const auto& l : r.levels) {
            ok = ok && l.audit.norm_ok && l.audit.negative_mass_ok && l.audit.tail_bound_ok && l.audit.coercivity_ok;
        }
        rep.checks_ok = rep.checks_ok && ok;
    }
}

inline void validate(const ExperimentSpec& spec)
{
    if (spec.radii.size() < 3) throw ValidationError("experiment needs at least 3 truncation radii");
    for (std::size_t i = 1; i < spec.radii.size(); ++i) {
        if (spec.radii[i] <= spec.radii[i - 1]) throw ValidationError("truncation radii must be strictly increasing");
    }
    if (spec.radii.front() < 2) throw ValidationError("truncation radii must be >= 2");
    if (spec.source_bump < 0.0) throw ValidationError("source_bump must be nonnegative");
    if (!(spec.bump_radius > 0.0)) throw ValidationError("bump_radius must be positive");
    (void)PExponent(spec.p);
}

inline ComparisonReport start_report(const ExperimentSpec& spec)
{
    ComparisonReport rep;
    rep.mode = spec.mode;
    rep.family = spec.family.name();
    rep.p = spec.p;
    rep.target_dim = spec.target_dim;
    rep.u_recipe = spec.u_recipe;
    rep.v_recipe = spec.v_recipe;
    rep.boundary = spec.boundary;
    rep.osc_tolerance = spec.osc_tolerance;
    rep.decay_factor = spec.decay_factor;
    return rep;
}

inline std::optional<double> probe(const ExperimentSpec& spec, int N)
{
    if (!spec.probe_capacity) return std::nullopt;
    return capacity(spec.family, PExponent(spec.p), N);
}

// Shared driver for the scalar and map modes.
inline ComparisonReport run_comparison(const ExperimentSpec& spec)
{
    validate(spec);
    const PExponent p(spec.p);
    const std::size_t dim = spec.target_dim;
    const auto shift = shift_or_zero(spec, dim);
    ComparisonReport rep = start_report(spec);
    std::vector<double> caps;
    for (int N : spec.radii) {
        const Truncation t = spec.family.truncate(N);
        const NodeField v = make_recipe(spec.v_recipe, t, dim, spec, spec.v_fields);
        ComparisonRow row;
        NodeField u;
        if (spec.u_recipe == "same") {
            u = v;
            for (NodeIndex a = 0; a < u.size(); ++a) {
                for (std::size_t k = 0; k < dim; ++k) u.at(a, k) += shift[k];
            }
        } else if (spec.u_recipe == "solve") {
            NodeField f = p_laplacian(t.graph, v, p);
            if (spec.source_bump > 0.0) {
                if (dim != 1) throw ValidationError("source_bump is only meaningful for scalar comparisons");
                ExperimentSpec bump_spec = spec;
                bump_spec.bump_amplitude = 1.0;
                const NodeField b = make_recipe("bump", t, 1, bump_spec, {});
                for (NodeIndex a = 0; a < t.graph.num_nodes(); ++a) f.at(a) += spec.source_bump * b.at(a);
            }
            const SolveReport sr = solve_matched(t, v, f, p, shift, spec);
            u = sr.solution;
            row.solved = true;
            row.solver_converged = sr.converged;
            row.solver_iterations = sr.iterations;
            row.solver_residual = sr.residual;
            if (!sr.converged) {
                throw NumericalError("solver did not converge at N = " + std::to_string(N) + ": " + sr.message);
            }
        } else {
            throw ValidationError("unknown u recipe '" + spec.u_recipe + "' for comparison modes");
        }
        fill_common(row, t, u, v, p, spec, default_inner_radius(spec, N));

        if (spec.mode == ExperimentMode::Map) {
            const NodeField z = u - v;
            double rmax = 0.0;
            for (NodeIndex a = 0; a < z.size(); ++a) rmax = std::max(rmax, detail::distance(z[a], row.A));
            for (int n = 1; n <= 60; ++n) {
                const double T = std::ldexp(1.0, n);
                LevelRow lr;
                lr.n = n;
                lr.audit = audit_X_T(t.graph, u, v, row.A, T, p, spec.coercivity_tolerance);
                lr.tail_criterion = 2.0 * lr.audit.tail_energy < 1.0 / n;
                row.levels.push_back(lr);
                if (n >= spec.min_levels && T > rmax) break;
            }
        }
        if (auto c = probe(spec, N)) {
            row.capacity = c;
            caps.push_back(*c);
        }
        rep.rows.push_back(std::move(row));
    }
    finish(rep, spec, caps);
    return rep;
}

}  // namespace detail

/// Scalar comparison: Lap_p u >= Lap_p v with |du|, |dv| in L^p forces u = v + A.
inline ComparisonReport run_scalar_comparison(ExperimentSpec spec)
{
    spec.mode = ExperimentMode::Scalar;
    if (spec.target_dim != 1) throw ValidationError("scalar comparison needs target_dim = 1");
    return detail::run_comparison(spec);
}

/// Map comparison: Lap_p u = Lap_p v for R^n-valued maps forces u = v + A, A in R^n.
inline ComparisonReport run_map_comparison(ExperimentSpec spec)
{
    spec.mode = ExperimentMode::Map;
    if (spec.target_dim < 2) throw ValidationError("map comparison needs target_dim >= 2");
    return detail::run_comparison(spec);
}

/// v = 0: a p-harmonic u with decaying boundary data flattens on parabolic families.
inline ComparisonReport run_constancy(ExperimentSpec spec)
{
    spec.mode = ExperimentMode::Constancy;
    spec.target_dim = 1;
    if (spec.u_recipe == "solve") spec.u_recipe = "decaying";
    detail::validate(spec);
    const PExponent p(spec.p);
    ComparisonReport rep = detail::start_report(spec);
    rep.v_recipe = "zero";
    std::vector<double> caps;
    for (int N : spec.radii) {
        const Truncation t = spec.family.truncate(N);
        const NodeField v(t.graph.num_nodes(), 1);
        ComparisonRow row;
        NodeField u;
        if (spec.u_recipe == "constant") {
            u = NodeField(t.graph.num_nodes(), 1, spec.bump_amplitude);
        } else if (spec.u_recipe == "decaying" || spec.u_recipe == "equilibrium") {
            SolveReport sr;
            if (spec.u_recipe == "equilibrium") {
                sr = equilibrium_potential(t, p, spec.solver);
            } else {
                ProblemSpec ps;
                ps.graph = t.graph;
                ps.p = p;
                ps.options = spec.solver;
                for (NodeIndex a = 0; a < t.graph.num_nodes(); ++a) {
                    if (!t.graph.is_boundary(a)) continue;
                    const double sign = t.coords[a][0] >= 0 ? 1.0 : -1.0;
                    ps.dirichlet.emplace(a, std::vector<double>{sign / N});
                }
                sr = solve(ps);
            }
            if (!sr.converged) throw NumericalError("solver did not converge at N = " + std::to_string(N));
            u = sr.solution;
            row.solved = true;
            row.solver_iterations = sr.iterations;
            row.solver_residual = sr.residual;
        } else {
            throw ValidationError("unknown u recipe '" + spec.u_recipe + "' for constancy mode");
        }
        detail::fill_common(row, t, u, v, p, spec, detail::default_inner_radius(spec, N));
        if (auto c = detail::probe(spec, N)) {
            row.capacity = c;
            caps.push_back(*c);
        }
        rep.rows.push_back(std::move(row));
    }
    detail::finish(rep, spec, caps);
    return rep;
}

/// u = -G_N / G_N(center) (p-subharmonic, bounded, energy bounded in N) against
/// v = 0 (or v = u with v_recipe "same"). On a non-parabolic family the
/// oscillation of u - v over a fixed ball does not vanish.
inline ComparisonReport run_counterexample(ExperimentSpec spec)
{
    spec.mode = ExperimentMode::Counterexample;
    spec.target_dim = 1;
    if (spec.u_recipe == "solve") spec.u_recipe = "green";
    if (spec.v_recipe == "bump") spec.v_recipe = "zero";
    detail::validate(spec);
    if (spec.u_recipe != "green") throw ValidationError("counterexample mode uses the green u recipe");
    if (spec.v_recipe != "zero" && spec.v_recipe != "same") {
        throw ValidationError("counterexample v recipe must be zero or same");
    }
    const PExponent p(spec.p);
    ComparisonReport rep = detail::start_report(spec);
    std::vector<double> caps;
    for (int N : spec.radii) {
        const Truncation t = spec.family.truncate(N);
        const NodeField u = detail::normalized_green(t, p, spec.solver);
        const NodeField v = spec.v_recipe == "same" ? u : NodeField(t.graph.num_nodes(), 1);
        ComparisonRow row;
        row.solved = true;
        detail::fill_common(row, t, u, v, p, spec, detail::default_inner_radius(spec, N));
        if (auto c = detail::probe(spec, N)) {
            row.capacity = c;
            caps.push_back(*c);
        }
        rep.rows.push_back(std::move(row));
    }
    detail::finish(rep, spec, caps);
    return rep;
}

inline ComparisonReport run_experiment(const ExperimentSpec& spec)
{
    switch (spec.mode) {
    case ExperimentMode::Scalar: return run_scalar_comparison(spec);
    case ExperimentMode::Map: return run_map_comparison(spec);
    case ExperimentMode::Constancy: return run_constancy(spec);
    case ExperimentMode::Counterexample: return run_counterexample(spec);
    }
    throw ValidationError("unknown experiment mode");
}

}  // namespace pplap
