#pragma once

// Exhaustion families: increasing finite truncations of an infinite graph,
// indexed by a radius N, with node identities that are stable across N.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pplap/error.hpp"
#include "pplap/graph.hpp"

namespace pplap {

using LatticePoint = std::array<int, 3>;

/// One truncation. Boundary nodes (the discrete sphere) are flagged in the
/// graph; radius[a] is the distance of node a from the center.
struct Truncation {
    int N = 0;
    WeightedGraph graph;
    NodeIndex center = 0;
    std::vector<double> radius;
    std::vector<LatticePoint> coords;
};

enum class FamilyKind { Path, Line, Lattice, Custom };

class ExhaustionFamily {
public:
    /// Half-line {0, ..., N} rooted at 0; the sphere is {N}.
    static ExhaustionFamily path() { return ExhaustionFamily(FamilyKind::Path, 1); }

    /// Segment {-N, ..., N}; the sphere is {-N, N}.
    static ExhaustionFamily line() { return ExhaustionFamily(FamilyKind::Line, 1); }

    /// Euclidean balls |x| <= N in Z^d (d in 1..3) with unit weights and
    /// measures. Sphere nodes are those with a lattice neighbour outside.
    static ExhaustionFamily lattice(int d)
    {
        if (d < 1 || d > 3) throw ValidationError("lattice dimension must be 1, 2 or 3");
        return ExhaustionFamily(FamilyKind::Lattice, d);
    }

    /// Explicit truncations keyed by N. Node ids must be consistent across
    /// truncations; radius is the hop distance from the center id.
    static ExhaustionFamily custom(std::map<int, WeightedGraph> truncations, NodeId center)
    {
        if (truncations.empty()) throw ValidationError("custom family needs at least one truncation");
        ExhaustionFamily f(FamilyKind::Custom, 0);
        f.custom_ = std::make_shared<const std::map<int, WeightedGraph>>(std::move(truncations));
        f.custom_center_ = center;
        return f;
    }

    [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
    [[nodiscard]] int dimension() const noexcept { return dim_; }

    [[nodiscard]] std::string name() const
    {
        switch (kind_) {
        case FamilyKind::Path: return "path";
        case FamilyKind::Line: return "line";
        case FamilyKind::Lattice: return "lattice" + std::to_string(dim_);
        case FamilyKind::Custom: return "custom";
        }
        return "unknown";
    }

    [[nodiscard]] std::vector<int> available_radii() const
    {
        std::vector<int> out;
        if (custom_) {
            for (const auto& [n, _] : *custom_) out.push_back(n);
        }
        return out;
    }

    [[nodiscard]] Truncation truncate(int N) const
    {
        if (N < 1) throw ValidationError("truncation radius must be >= 1");
        switch (kind_) {
        case FamilyKind::Path: return segment(0, N, N);
        case FamilyKind::Line: return segment(-N, N, N);
        case FamilyKind::Lattice: return ball(N);
        case FamilyKind::Custom: return custom_truncation(N);
        }
        throw ValidationError("unknown family");
    }

    /// Stable id of a lattice point, independent of N.
    static NodeId lattice_id(const LatticePoint& x)
    {
        constexpr std::int64_t off = std::int64_t{1} << 20;
        return (x[0] + off) + ((x[1] + off) << 21) + ((x[2] + off) << 42);
    }

private:
    ExhaustionFamily(FamilyKind kind, int dim) : kind_(kind), dim_(dim) {}

    static Truncation segment(int lo, int hi, int N)
    {
        const auto n = static_cast<std::size_t>(hi - lo + 1);
        std::vector<Edge> edges;
        for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
        std::vector<std::uint8_t> boundary(n, 0);
        std::vector<NodeId> ids(n);
        Truncation t;
        t.N = N;
        t.radius.resize(n);
        t.coords.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int x = lo + static_cast<int>(i);
            ids[i] = x;
            t.radius[i] = std::abs(x);
            t.coords[i] = {x, 0, 0};
            if (std::abs(x) == N) boundary[i] = 1;
        }
        t.center = static_cast<NodeIndex>(-lo);
        t.graph = WeightedGraph(std::vector<double>(n, 1.0), std::move(edges), std::move(boundary), std::move(ids));
        return t;
    }

    Truncation ball(int N) const
    {
        const long r2max = static_cast<long>(N) * N;
        auto inside = [&](const LatticePoint& x) {
            return static_cast<long>(x[0]) * x[0] + static_cast<long>(x[1]) * x[1] + static_cast<long>(x[2]) * x[2] <=
                   r2max;
        };
        const int ry = dim_ >= 2 ? N : 0;
        const int rz = dim_ >= 3 ? N : 0;

        Truncation t;
        t.N = N;
        std::map<LatticePoint, NodeIndex> index;
        for (int x = -N; x <= N; ++x) {
            for (int y = -ry; y <= ry; ++y) {
                for (int z = -rz; z <= rz; ++z) {
                    const LatticePoint pt{x, y, z};
                    if (!inside(pt)) continue;
                    index.emplace(pt, t.coords.size());
                    t.coords.push_back(pt);
                }
            }
        }
        const std::size_t n = t.coords.size();
        std::vector<Edge> edges;
        std::vector<std::uint8_t> boundary(n, 0);
        std::vector<NodeId> ids(n);
        t.radius.resize(n);
        for (NodeIndex a = 0; a < n; ++a) {
            const LatticePoint& x = t.coords[a];
            ids[a] = lattice_id(x);
            t.radius[a] = std::sqrt(static_cast<double>(x[0]) * x[0] + static_cast<double>(x[1]) * x[1] +
                                    static_cast<double>(x[2]) * x[2]);
            for (int k = 0; k < dim_; ++k) {
                for (int s : {-1, 1}) {
                    LatticePoint y = x;
                    y[k] += s;
                    auto it = index.find(y);
                    if (it == index.end()) {
                        boundary[a] = 1;
                    } else if (s > 0) {
                        edges.push_back({a, it->second, 1.0});
                    }
                }
            }
        }
        t.center = index.at({0, 0, 0});
        t.graph = WeightedGraph(std::vector<double>(n, 1.0), std::move(edges), std::move(boundary), std::move(ids));
        return t;
    }

    Truncation custom_truncation(int N) const
    {
        auto it = custom_->find(N);
        if (it == custom_->end()) throw ValidationError("custom family has no truncation for N = " + std::to_string(N));
        Truncation t;
        t.N = N;
        t.graph = it->second;
        t.center = t.graph.index_of(custom_center_);
        const std::size_t n = t.graph.num_nodes();
        t.radius.assign(n, std::numeric_limits<double>::infinity());
        t.coords.assign(n, {0, 0, 0});
        std::vector<NodeIndex> frontier{t.center};
        t.radius[t.center] = 0.0;
        while (!frontier.empty()) {
            std::vector<NodeIndex> next;
            for (NodeIndex a : frontier) {
                for (const Incidence& inc : t.graph.incidence(a)) {
                    const Edge& e = t.graph.edge(inc.edge);
                    const NodeIndex b = inc.sign > 0 ? e.head : e.tail;
                    if (std::isinf(t.radius[b])) {
                        t.radius[b] = t.radius[a] + 1.0;
                        next.push_back(b);
                    }
                }
            }
            frontier = std::move(next);
        }
        return t;
    }

    FamilyKind kind_;
    int dim_;
    std::shared_ptr<const std::map<int, WeightedGraph>> custom_;
    NodeId custom_center_ = 0;
};

}  // namespace pplap
