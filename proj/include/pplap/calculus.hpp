#pragma once

// Discrete calculus on weighted graphs.
//
//   gradient     du(e)      = u(head) - u(tail)
//   divergence   div X(a)   = (1/mu_a) sum_{e at a} (+/-) w_e X(e)     (+ at tail, - at head)
//   p-Laplacian  Lap_p u    = div(|du|^(p-2) du)
//   p-energy     E_p(u)     = (1/p) sum_e w_e |du(e)|^p
//
// With these signs  sum_a mu_a <phi, div X>(a) = - sum_e w_e <dphi, X>(e)  on
// every finite graph, and the node-gradient of E_p is -mu * Lap_p u.
// For maps, |du(e)| is the Euclidean norm of the edge difference.

#include <cmath>
#include <span>

#include "pplap/graph.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

namespace detail {

inline double squared_norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace detail

inline EdgeField edge_gradient(const WeightedGraph& g, const NodeField& u)
{
    require_on(g, u);
    EdgeField du(g.num_edges(), u.dim());
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        for (std::size_t c = 0; c < u.dim(); ++c) du.at(k, c) = u.at(e.head, c) - u.at(e.tail, c);
    }
    return du;
}

/// Unweighted edge flux |du|^(p-2) du.
inline EdgeField p_flux(const WeightedGraph& g, const NodeField& u, PExponent p)
{
    EdgeField flux = edge_gradient(g, u);
    for (EdgeIndex k = 0; k < flux.size(); ++k) {
        auto row = flux[k];
        const double w = std::pow(std::sqrt(detail::squared_norm(row)), p.value() - 2.0);
        for (double& v : row) v *= w;
    }
    return flux;
}

inline NodeField divergence(const WeightedGraph& g, const EdgeField& x)
{
    require_on(g, x);
    NodeField out(g.num_nodes(), x.dim());
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const Edge& e = g.edge(k);
        for (std::size_t c = 0; c < x.dim(); ++c) {
            const double f = e.weight * x.at(k, c);
            out.at(e.tail, c) += f;
            out.at(e.head, c) -= f;
        }
    }
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        for (double& v : out[a]) v /= g.measure(a);
    }
    return out;
}

inline NodeField p_laplacian(const WeightedGraph& g, const NodeField& u, PExponent p)
{
    return divergence(g, p_flux(g, u, p));
}

/// sum_e w_e |X(e)|^q, the q-th power of lq_norm.
inline double lq_sum(const WeightedGraph& g, const EdgeField& x, double q)
{
    require_on(g, x);
    double s = 0.0;
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        s += g.edge(k).weight * std::pow(std::sqrt(detail::squared_norm(x[k])), q);
    }
    return s;
}

/// (sum_e w_e |X(e)|^q)^(1/q)
inline double lq_norm(const WeightedGraph& g, const EdgeField& x, double q)
{
    if (!(q >= 1.0)) throw ValidationError("lq_norm requires q >= 1");
    return std::pow(lq_sum(g, x, q), 1.0 / q);
}

/// ||du||_p^p = sum_e w_e |du(e)|^p (no 1/p factor).
inline double p_energy_sum(const WeightedGraph& g, const NodeField& u, PExponent p)
{
    return lq_sum(g, edge_gradient(g, u), p.value());
}

/// E_p(u) = (1/p) sum_e w_e |du(e)|^p
inline double p_energy(const WeightedGraph& g, const NodeField& u, PExponent p)
{
    return p_energy_sum(g, u, p) / p.value();
}

/// sum_a mu_a <phi(a), psi(a)>
inline double node_pairing(const WeightedGraph& g, const NodeField& phi, const NodeField& psi)
{
    require_on(g, phi);
    phi.require_compatible(psi);
    double s = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) s += g.measure(a) * detail::dot(phi[a], psi[a]);
    return s;
}

/// sum_e w_e <X(e), Y(e)>
inline double edge_pairing(const WeightedGraph& g, const EdgeField& x, const EdgeField& y)
{
    require_on(g, x);
    x.require_compatible(y);
    double s = 0.0;
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) s += g.edge(k).weight * detail::dot(x[k], y[k]);
    return s;
}

/// |sum_a mu_a <phi, div X> + sum_e w_e <dphi, X>|, zero up to rounding.
inline double summation_by_parts_residual(const WeightedGraph& g, const NodeField& phi, const EdgeField& x)
{
    if (phi.dim() != x.dim()) throw ValidationError("phi and X must have the same value dimension");
    return std::abs(node_pairing(g, phi, divergence(g, x)) + edge_pairing(g, edge_gradient(g, phi), x));
}

/// Magnitude against which summation_by_parts_residual is compared:
/// sum_a mu_a |phi||div X| + sum_e w_e |dphi||X|.
inline double summation_by_parts_scale(const WeightedGraph& g, const NodeField& phi, const EdgeField& x)
{
    const NodeField div = divergence(g, x);
    const EdgeField dphi = edge_gradient(g, phi);
    double s = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) s += g.measure(a) * detail::norm(phi[a]) * detail::norm(div[a]);
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) s += g.edge(k).weight * detail::norm(dphi[k]) * detail::norm(x[k]);
    return s;
}

/// Both sides of the edgewise monotonicity inequality
///
///   sum_e c_e w_e <|du|^(p-2)du - |dv|^(p-2)dv, du - dv>  >=  mhck_constant(p) sum_e c_e w_e |du - dv|^p
///
/// with optional nonnegative edge weights c_e (all ones when empty).
struct CoercivitySums {
    double pairing = 0.0;
    double bound = 0.0;
    double scale = 0.0;  // sum_e c_e w_e (|du|^p + |dv|^p), for relative tolerances
};

inline CoercivitySums coercivity_sums(const WeightedGraph& g, const NodeField& u, const NodeField& v, PExponent p,
                                      std::span<const double> edge_cutoff = {})
{
    require_on(g, u);
    u.require_compatible(v);
    if (!edge_cutoff.empty() && edge_cutoff.size() != g.num_edges()) {
        throw ValidationError("edge cutoff weights must have one entry per edge");
    }
    const EdgeField du = edge_gradient(g, u);
    const EdgeField dv = edge_gradient(g, v);
    const double c = mhck_constant(p);
    const double q = p.value();
    CoercivitySums out;
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) {
        const double cut = edge_cutoff.empty() ? 1.0 : edge_cutoff[k];
        const double w = g.edge(k).weight * cut;
        if (w == 0.0) continue;
        out.pairing += w * monotonicity_pairing(du[k], dv[k], p);
        out.bound += w * c * std::pow(detail::distance(du[k], dv[k]), q);
        out.scale += w * (std::pow(detail::norm(du[k]), q) + std::pow(detail::norm(dv[k]), q));
    }
    return out;
}

}  // namespace pplap
