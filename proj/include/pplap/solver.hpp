#pragma once

// Variational solver for  Lap_p u = f  on a weighted graph.
//
// The solution minimizes  F(u) = E_p(u) + sum_a mu_a <f(a), u(a)>  over
// fields matching the Dirichlet data (or a single gauge pin when there is
// none). F is convex and C^1 for p >= 2, and strictly convex modulo the
// constraint on a connected graph.
//
// Iteration: Newton steps on F with the edge Hessian
//   w_e (rho^(p-2) I + (p-2) rho^(p-4) du du^T),   rho^2 = |du|^2 + eps_reg,
// globalized by Armijo backtracking (halving). If the Newton system cannot
// be factored, a diagonally scaled gradient step is used instead.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pplap/calculus.hpp"
#include "pplap/error.hpp"
#include "pplap/graph.hpp"
#include "pplap/vectorineq.hpp"

namespace pplap {

struct GaugePin {
    NodeIndex node = 0;
    std::vector<double> value;
};

struct SolverOptions {
    /// Interior residual target, relative to max(1, |f|_inf, |du|_inf^(p-1)).
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    double regularization = 1e-12;
    /// Once the residual target is met, keep taking Newton steps until the
    /// update falls below step_tolerance * max(1, |u|_inf). For p > 2 the
    /// residual alone does not pin down u where du is small.
    double step_tolerance = 1e-12;
    std::size_t max_polish_iterations = 200;
};

struct ProblemSpec {
    WeightedGraph graph;
    PExponent p{2.0};
    std::size_t dim = 1;
    /// Empty means f = 0.
    NodeField source;
    std::map<NodeIndex, std::vector<double>> dirichlet;
    std::optional<GaugePin> gauge;
    std::optional<NodeField> initial_guess;
    SolverOptions options{};
};

struct SolveReport {
    NodeField solution;
    std::size_t iterations = 0;
    double residual = 0.0;
    /// Absolute residual threshold that was applied.
    double tolerance = 0.0;
    double energy = 0.0;
    bool converged = false;
    std::vector<double> energy_history;
    std::string message;
};

/// max over non-excluded nodes and components of |Lap_p u - f|. An empty f
/// is treated as zero; an empty mask excludes nothing.
inline double residual(const WeightedGraph& g, const NodeField& u, const NodeField& f, PExponent p,
                       std::span<const std::uint8_t> excluded = {})
{
    const NodeField lap = p_laplacian(g, u, p);
    const bool has_f = f.size() != 0;
    if (has_f) u.require_compatible(f);
    double r = 0.0;
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        if (!excluded.empty() && excluded[a]) continue;
        for (std::size_t c = 0; c < u.dim(); ++c) {
            r = std::max(r, std::abs(lap.at(a, c) - (has_f ? f.at(a, c) : 0.0)));
        }
    }
    return r;
}

/// F(u) = E_p(u) + sum_a mu_a <f(a), u(a)>
inline double solver_objective(const WeightedGraph& g, const NodeField& u, const NodeField& f, PExponent p)
{
    double v = p_energy(g, u, p);
    if (f.size() != 0) v += node_pairing(g, f, u);
    return v;
}

namespace detail {

class NewtonSolver {
public:
    explicit NewtonSolver(const ProblemSpec& spec) : spec_(spec), g_(spec.graph), d_(spec.dim)
    {
        validate();
        fixed_.assign(g_.num_nodes(), 0);
        dirichlet_mask_.assign(g_.num_nodes(), 0);
        for (const auto& [a, _] : spec_.dirichlet) fixed_[a] = dirichlet_mask_[a] = 1;
        if (spec_.gauge) fixed_[spec_.gauge->node] = 1;
        slot_.assign(g_.num_nodes(), kNone);
        for (NodeIndex a = 0; a < g_.num_nodes(); ++a) {
            if (!fixed_[a]) slot_[a] = free_count_++;
        }
        f_ = spec_.source.size() != 0 ? spec_.source : NodeField(g_.num_nodes(), d_);
    }

    SolveReport run()
    {
        const PExponent p = spec_.p;
        const SolverOptions& opt = spec_.options;
        SolveReport rep;

        NodeField u = spec_.initial_guess ? *spec_.initial_guess : linear_guess();
        u.require_compatible(f_);
        impose_constraints(u);

        double last_step = std::numeric_limits<double>::infinity();
        std::size_t polish = 0;
        double min_polish_step = std::numeric_limits<double>::infinity();
        std::size_t stagnant = 0;
        double fval = solver_objective(g_, u, f_, p);
        rep.energy_history.push_back(fval);

        for (std::size_t it = 0;; ++it) {
            rep.iterations = it;
            const double res = residual(g_, u, f_, p, dirichlet_mask_);
            const double tol_abs = opt.tolerance * residual_scale(u);
            rep.residual = res;
            rep.tolerance = tol_abs;
            const bool small = res <= tol_abs;
            if (free_count_ == 0 ||
                (small && (last_step <= opt.step_tolerance * std::max(1.0, u.max_abs()) ||
                           polish >= opt.max_polish_iterations))) {
                rep.converged = small || free_count_ == 0;
                break;
            }
            if (it >= opt.max_iterations) {
                rep.message = "iteration cap reached";
                break;
            }
            if (small) ++polish;

            Eigen::VectorXd grad;
            Eigen::VectorXd dir;
            newton_direction(u, p, opt.regularization, grad, dir);
            const double slope = grad.dot(dir);

            // Armijo backtracking; the slack absorbs rounding once F is flat.
            const double slack = 64.0 * std::numeric_limits<double>::epsilon() * objective_scale(u);
            double t = 1.0;
            NodeField trial = u;
            bool accepted = false;
            double ftrial = 0.0;
            for (int k = 0; k < 80; ++k) {
                trial = u;
                apply_step(trial, dir, t);
                ftrial = solver_objective(g_, trial, f_, p);
                if (std::isfinite(ftrial) && ftrial <= fval + 1e-4 * t * slope + slack) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                rep.converged = small;
                rep.message = small ? "stopped at rounding floor" : "line search failed";
                break;
            }
            last_step = t * dir.lpNorm<Eigen::Infinity>();
            // Past the residual target, steps that stop shrinking are driven
            // by rounding noise in the gradient.
            if (small) {
                if (last_step < 0.5 * min_polish_step) {
                    min_polish_step = last_step;
                    stagnant = 0;
                } else if (++stagnant >= 10) {
                    u = std::move(trial);
                    fval = ftrial;
                    rep.converged = true;
                    rep.message = "stopped at rounding floor";
                    break;
                }
            }
            u = std::move(trial);
            fval = ftrial;
            rep.energy_history.push_back(fval);
        }
        rep.energy = fval;
        rep.solution = std::move(u);
        if (rep.converged && rep.message.empty()) rep.message = "converged";
        return rep;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    void validate() const
    {
        const std::size_t n = g_.num_nodes();
        if (d_ == 0) throw ValidationError("problem dimension must be >= 1");
        if (spec_.source.size() != 0 && (spec_.source.size() != n || spec_.source.dim() != d_)) {
            throw ValidationError("source field shape does not match graph/dimension");
        }
        for (const auto& [a, val] : spec_.dirichlet) {
            if (a >= n) throw ValidationError("Dirichlet node out of range");
            if (val.size() != d_) throw ValidationError("Dirichlet value has wrong dimension");
        }
        if (spec_.initial_guess && (spec_.initial_guess->size() != n || spec_.initial_guess->dim() != d_)) {
            throw ValidationError("initial guess shape does not match graph/dimension");
        }
        if (!spec_.dirichlet.empty()) {
            if (spec_.gauge) throw ValidationError("gauge pin is only allowed without Dirichlet data");
            return;
        }
        if (!spec_.gauge) throw ValidationError("problem without Dirichlet data needs a gauge pin");
        if (spec_.gauge->node >= n || spec_.gauge->value.size() != d_) {
            throw ValidationError("gauge pin node or value invalid");
        }
        if (spec_.source.size() != 0) {
            for (std::size_t c = 0; c < d_; ++c) {
                double total = 0.0;
                double mag = 0.0;
                for (NodeIndex a = 0; a < n; ++a) {
                    total += g_.measure(a) * spec_.source.at(a, c);
                    mag += g_.measure(a) * std::abs(spec_.source.at(a, c));
                }
                if (std::abs(total) > 1e-12 * std::max(1.0, mag)) {
                    throw ValidationError("incompatible source: sum of mu*f must vanish without Dirichlet data");
                }
            }
        }
    }

    void impose_constraints(NodeField& u) const
    {
        for (const auto& [a, val] : spec_.dirichlet) std::copy(val.begin(), val.end(), u[a].begin());
        if (spec_.gauge) std::copy(spec_.gauge->value.begin(), spec_.gauge->value.end(), u[spec_.gauge->node].begin());
    }

    // Solution of the p = 2 problem with the same data.
    NodeField linear_guess() const
    {
        NodeField u(g_.num_nodes(), d_);
        impose_constraints(u);
        if (free_count_ == 0) return u;
        Eigen::VectorXd grad;
        Eigen::VectorXd dir;
        newton_direction(u, PExponent(2.0), 0.0, grad, dir);
        apply_step(u, dir, 1.0);
        return u;
    }

    double residual_scale(const NodeField& u) const
    {
        const EdgeField du = edge_gradient(g_, u);
        double m = 0.0;
        for (EdgeIndex k = 0; k < du.size(); ++k) m = std::max(m, std::sqrt(squared_norm(du[k])));
        return std::max({1.0, f_.max_abs(), std::pow(m, spec_.p.value() - 1.0)});
    }

    double objective_scale(const NodeField& u) const
    {
        double s = std::abs(p_energy(g_, u, spec_.p));
        for (NodeIndex a = 0; a < g_.num_nodes(); ++a) {
            for (std::size_t c = 0; c < d_; ++c) s += g_.measure(a) * std::abs(f_.at(a, c) * u.at(a, c));
        }
        return std::max(s, std::numeric_limits<double>::min());
    }

    void apply_step(NodeField& u, const Eigen::VectorXd& dir, double t) const
    {
        for (NodeIndex a = 0; a < g_.num_nodes(); ++a) {
            if (slot_[a] == kNone) continue;
            for (std::size_t c = 0; c < d_; ++c) u.at(a, c) += t * dir[static_cast<Eigen::Index>(slot_[a] * d_ + c)];
        }
    }

    void newton_direction(const NodeField& u, PExponent p, double eps, Eigen::VectorXd& grad,
                          Eigen::VectorXd& dir) const
    {
        const auto nfree = static_cast<Eigen::Index>(free_count_ * d_);
        const double q = p.value();

        // Gradient of F on free slots: mu_a (f(a) - Lap_p u(a)).
        const NodeField lap = p_laplacian(g_, u, p);
        grad.setZero(nfree);
        for (NodeIndex a = 0; a < g_.num_nodes(); ++a) {
            if (slot_[a] == kNone) continue;
            for (std::size_t c = 0; c < d_; ++c) {
                grad[static_cast<Eigen::Index>(slot_[a] * d_ + c)] = g_.measure(a) * (f_.at(a, c) - lap.at(a, c));
            }
        }

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(g_.num_edges() * 4 * d_ * d_);
        const EdgeField du = edge_gradient(g_, u);
        std::vector<double> block(d_ * d_);
        auto add = [&](std::size_t sa, std::size_t sb, double sign) {
            for (std::size_t i = 0; i < d_; ++i) {
                for (std::size_t j = 0; j < d_; ++j) {
                    const double v = sign * block[i * d_ + j];
                    if (v != 0.0) {
                        trip.emplace_back(static_cast<int>(sa * d_ + i), static_cast<int>(sb * d_ + j), v);
                    }
                }
            }
        };
        for (EdgeIndex k = 0; k < g_.num_edges(); ++k) {
            const Edge& e = g_.edge(k);
            const std::size_t st = slot_[e.tail];
            const std::size_t sh = slot_[e.head];
            if (st == kNone && sh == kNone) continue;
            const auto delta = du[k];
            const double rho2 = squared_norm(delta) + (q == 2.0 ? 0.0 : eps);
            const double iso = e.weight * std::pow(rho2, 0.5 * (q - 2.0));
            const double aniso = q == 2.0 ? 0.0 : e.weight * (q - 2.0) * std::pow(rho2, 0.5 * (q - 4.0));
            for (std::size_t i = 0; i < d_; ++i) {
                for (std::size_t j = 0; j < d_; ++j) {
                    block[i * d_ + j] = (i == j ? iso : 0.0) + aniso * delta[i] * delta[j];
                }
            }
            if (st != kNone) add(st, st, 1.0);
            if (sh != kNone) add(sh, sh, 1.0);
            if (st != kNone && sh != kNone) {
                add(st, sh, -1.0);
                add(sh, st, -1.0);
            }
        }
        Eigen::SparseMatrix<double> hess(nfree, nfree);
        hess.setFromTriplets(trip.begin(), trip.end());

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        ldlt.compute(hess);
        if (ldlt.info() == Eigen::Success) {
            dir = ldlt.solve(-grad);
            if (ldlt.info() == Eigen::Success && dir.allFinite() && grad.dot(dir) <= 0.0) return;
        }
        // Fallback: diagonally scaled steepest descent.
        dir.resize(nfree);
        for (Eigen::Index i = 0; i < nfree; ++i) {
            const double h = hess.coeff(i, i);
            dir[i] = -grad[i] / (h > 0.0 ? h : 1.0);
        }
    }

    const ProblemSpec& spec_;
    const WeightedGraph& g_;
    std::size_t d_;
    NodeField f_;
    std::vector<std::uint8_t> fixed_;
    std::vector<std::uint8_t> dirichlet_mask_;
    std::vector<std::size_t> slot_;
    std::size_t free_count_ = 0;
};

}  // namespace detail

/// Minimize F subject to the constraints in spec. Throws ValidationError
/// for ill-posed specs; non-convergence is reported through
/// SolveReport::converged rather than thrown.
inline SolveReport solve(const ProblemSpec& spec)
{
    return detail::NewtonSolver(spec).run();
}

/// Mask of Dirichlet nodes, as used by residual().
inline std::vector<std::uint8_t> dirichlet_mask(const ProblemSpec& spec)
{
    std::vector<std::uint8_t> m(spec.graph.num_nodes(), 0);
    for (const auto& [a, _] : spec.dirichlet) m[a] = 1;
    return m;
}

}  // namespace pplap
