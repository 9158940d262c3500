#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pplap/error.hpp"

namespace pplap {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;
using NodeId = std::int64_t;

/// Oriented edge tail -> head with positive weight.
struct Edge {
    NodeIndex tail = 0;
    NodeIndex head = 0;
    double weight = 1.0;
};

/// Edge incident to a node, with +1 when the node is the tail and -1 when it
/// is the head.
struct Incidence {
    EdgeIndex edge;
    int sign;
};

/// Finite connected weighted graph: the discrete stand-in for a manifold.
///
/// Nodes carry a measure mu > 0 and a boundary flag; every undirected
/// adjacency appears as exactly one oriented edge. Immutable once built.
class WeightedGraph {
public:
    WeightedGraph() = default;

    WeightedGraph(std::vector<double> measure, std::vector<Edge> edges, std::vector<std::uint8_t> boundary = {},
                  std::vector<NodeId> ids = {})
        : measure_(std::move(measure)), edges_(std::move(edges)), boundary_(std::move(boundary)), ids_(std::move(ids))
    {
        const std::size_t n = measure_.size();
        if (n == 0) throw ValidationError("graph must have at least one node");
        if (boundary_.empty()) boundary_.assign(n, 0);
        if (ids_.empty()) {
            ids_.resize(n);
            std::iota(ids_.begin(), ids_.end(), NodeId{0});
        }
        if (boundary_.size() != n || ids_.size() != n) {
            throw ValidationError("boundary flags and ids must have one entry per node");
        }
        for (double mu : measure_) {
            if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("node measures must be finite and > 0");
        }
        index_.reserve(n);
        for (NodeIndex a = 0; a < n; ++a) {
            if (!index_.emplace(ids_[a], a).second) {
                throw ValidationError("duplicate node id " + std::to_string(ids_[a]));
            }
        }

        std::set<std::pair<NodeIndex, NodeIndex>> seen;
        incidence_offsets_.assign(n + 1, 0);
        for (const Edge& e : edges_) {
            if (e.tail >= n || e.head >= n) throw ValidationError("edge endpoint out of range");
            if (e.tail == e.head) throw ValidationError("self-loop at node " + std::to_string(ids_[e.tail]));
            if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
                throw ValidationError("edge weights must be finite and > 0");
            }
            if (!seen.emplace(std::min(e.tail, e.head), std::max(e.tail, e.head)).second) {
                throw ValidationError("duplicate adjacency between nodes " + std::to_string(ids_[e.tail]) +
                                      " and " + std::to_string(ids_[e.head]));
            }
            ++incidence_offsets_[e.tail + 1];
            ++incidence_offsets_[e.head + 1];
        }
        std::partial_sum(incidence_offsets_.begin(), incidence_offsets_.end(), incidence_offsets_.begin());
        incidence_.resize(incidence_offsets_.back());
        std::vector<std::size_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
        for (EdgeIndex k = 0; k < edges_.size(); ++k) {
            incidence_[fill[edges_[k].tail]++] = {k, +1};
            incidence_[fill[edges_[k].head]++] = {k, -1};
        }
        require_connected();
    }

    [[nodiscard]] std::size_t num_nodes() const noexcept { return measure_.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }
    [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
    [[nodiscard]] const Edge& edge(EdgeIndex k) const { return edges_[k]; }
    [[nodiscard]] double measure(NodeIndex a) const { return measure_[a]; }
    [[nodiscard]] std::span<const double> measures() const noexcept { return measure_; }
    [[nodiscard]] bool is_boundary(NodeIndex a) const { return boundary_[a] != 0; }
    [[nodiscard]] std::span<const std::uint8_t> boundary_flags() const noexcept { return boundary_; }
    [[nodiscard]] bool has_boundary() const
    {
        return std::any_of(boundary_.begin(), boundary_.end(), [](auto b) { return b != 0; });
    }
    [[nodiscard]] NodeId id(NodeIndex a) const { return ids_[a]; }
    [[nodiscard]] std::span<const NodeId> ids() const noexcept { return ids_; }

    [[nodiscard]] NodeIndex index_of(NodeId id) const
    {
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
        return it->second;
    }

    [[nodiscard]] bool contains(NodeId id) const { return index_.count(id) != 0; }

    [[nodiscard]] std::span<const Incidence> incidence(NodeIndex a) const
    {
        return {incidence_.data() + incidence_offsets_[a], incidence_offsets_[a + 1] - incidence_offsets_[a]};
    }

    /// The same graph with boundary flags replaced.
    [[nodiscard]] WeightedGraph with_boundary(std::vector<std::uint8_t> boundary) const
    {
        return WeightedGraph(measure_, edges_, std::move(boundary), ids_);
    }

private:
    void require_connected() const
    {
        const std::size_t n = num_nodes();
        std::vector<std::uint8_t> seen(n, 0);
        std::vector<NodeIndex> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const NodeIndex a = stack.back();
            stack.pop_back();
            for (const Incidence& inc : incidence(a)) {
                const Edge& e = edges_[inc.edge];
                const NodeIndex b = inc.sign > 0 ? e.head : e.tail;
                if (!seen[b]) {
                    seen[b] = 1;
                    ++count;
                    stack.push_back(b);
                }
            }
        }
        if (count != n) throw ValidationError("graph is not connected");
    }

    std::vector<double> measure_;
    std::vector<Edge> edges_;
    std::vector<std::uint8_t> boundary_;
    std::vector<NodeId> ids_;
    std::unordered_map<NodeId, NodeIndex> index_;
    std::vector<std::size_t> incidence_offsets_;
    std::vector<Incidence> incidence_;
};

struct NodeDomain {};
struct EdgeDomain {};

/// Values in R^dim attached to every node (Domain = NodeDomain) or every
/// oriented edge (Domain = EdgeDomain). Row-major: entry (i, k) at i*dim + k.
template <class Domain>
class Field {
public:
    Field() = default;
    Field(std::size_t size, std::size_t dim, double fill = 0.0) : size_(size), dim_(dim), data_(size * dim, fill)
    {
        if (dim == 0) throw ValidationError("field dimension must be >= 1");
    }
    Field(std::size_t size, std::size_t dim, std::vector<double> data)
        : size_(size), dim_(dim), data_(std::move(data))
    {
        if (dim == 0) throw ValidationError("field dimension must be >= 1");
        if (data_.size() != size * dim) throw ValidationError("field data size does not match size*dim");
    }

    /// Scalar field from plain values.
    static Field scalar(std::vector<double> values)
    {
        const std::size_t n = values.size();
        return Field(n, 1, std::move(values));
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    [[nodiscard]] std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    [[nodiscard]] double& at(std::size_t i, std::size_t k = 0) { return data_[i * dim_ + k]; }
    [[nodiscard]] double at(std::size_t i, std::size_t k = 0) const { return data_[i * dim_ + k]; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    Field& operator+=(const Field& o)
    {
        require_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o)
    {
        require_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(double s)
    {
        for (double& v : data_) v *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }

    void require_compatible(const Field& o) const
    {
        if (o.size_ != size_ || o.dim_ != dim_) throw ValidationError("field shapes differ");
    }

    friend bool operator==(const Field&, const Field&) = default;

private:
    std::size_t size_ = 0;
    std::size_t dim_ = 1;
    std::vector<double> data_;
};

/// Node-indexed function (ScalarField when dim = 1, MapField when dim = n).
using NodeField = Field<NodeDomain>;
/// Oriented-edge-indexed values. Reversing an edge negates its value.
using EdgeField = Field<EdgeDomain>;

inline void require_on(const WeightedGraph& g, const NodeField& u)
{
    if (u.size() != g.num_nodes()) throw ValidationError("node field size does not match graph");
}

inline void require_on(const WeightedGraph& g, const EdgeField& x)
{
    if (x.size() != g.num_edges()) throw ValidationError("edge field size does not match graph");
}

}  // namespace pplap
