#pragma once

// File formats: graphs, fields, profiles, problem and experiment specs in
// JSON; reports as JSON plus CSV tables; optional SVG line plots.
//
// Node ids are 64-bit integers and survive a round trip exactly. Doubles are
// written in shortest round-trip form in JSON and with %.17g in CSV, so
// re-reading either gives back the same bits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pplap/error.hpp"
#include "pplap/families.hpp"
#include "pplap/graph.hpp"
#include "pplap/harness.hpp"
#include "pplap/inequality_sampling.hpp"
#include "pplap/knr.hpp"
#include "pplap/model.hpp"
#include "pplap/solver.hpp"

namespace pplap::io {

using json = nlohmann::json;

inline constexpr const char* schema_version = "1";

// ---------------------------------------------------------------------------
// plumbing

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json(const std::filesystem::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// A CSV table with a fixed header. Cells are pre-formatted strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row)
    {
        if (row.size() != header.size()) throw ValidationError("CSV row width does not match header");
        rows.push_back(std::move(row));
    }

    [[nodiscard]] std::string str() const
    {
        std::string out;
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T require(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

/// A value that may be written as a number or as an array of numbers.
inline std::vector<double> vector_value(const json& j)
{
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& x : j) {
            if (!x.is_number()) throw ValidationError("vector entries must be numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    throw ValidationError("expected a number or an array of numbers");
}

inline json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------
// graphs and fields

inline WeightedGraph graph_from_json(const json& j)
{
    if (!j.is_object()) throw ValidationError("graph must be a JSON object");
    const auto& nodes = j.at("nodes");
    const auto& edges = j.at("edges");
    std::vector<double> measure;
    std::vector<std::uint8_t> boundary;
    std::vector<NodeId> ids;
    std::map<NodeId, NodeIndex> index;
    for (const auto& n : nodes) {
        const auto id = require<NodeId>(n, "id");
        if (!index.emplace(id, ids.size()).second) throw ValidationError("duplicate node id " + std::to_string(id));
        ids.push_back(id);
        measure.push_back(get_or<double>(n, "measure", 1.0));
        boundary.push_back(get_or<bool>(n, "boundary", false) ? 1 : 0);
    }
    auto lookup = [&](NodeId id) {
        auto it = index.find(id);
        if (it == index.end()) throw ValidationError("edge refers to unknown node id " + std::to_string(id));
        return it->second;
    };
    std::vector<Edge> es;
    for (const auto& e : edges) {
        es.push_back({lookup(require<NodeId>(e, "tail")), lookup(require<NodeId>(e, "head")),
                      get_or<double>(e, "weight", 1.0)});
    }
    return WeightedGraph(std::move(measure), std::move(es), std::move(boundary), std::move(ids));
}

inline json graph_to_json(const WeightedGraph& g)
{
    json nodes = json::array();
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        nodes.push_back({{"id", g.id(a)}, {"measure", g.measure(a)}, {"boundary", g.is_boundary(a)}});
    }
    json edges = json::array();
    for (const Edge& e : g.edges()) {
        edges.push_back({{"tail", g.id(e.tail)}, {"head", g.id(e.head)}, {"weight", e.weight}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

/// {"dim": n, "values": [{"id": .., "value": [..]}, ...]}; every node must appear.
inline NodeField field_from_json(const WeightedGraph& g, const json& j)
{
    const auto& values = j.is_array() ? j : j.at("values");
    std::size_t dim = j.is_object() ? get_or<std::size_t>(j, "dim", 0) : 0;
    std::vector<std::vector<double>> rows(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    for (const auto& entry : values) {
        const auto id = require<NodeId>(entry, "id");
        if (!g.contains(id)) throw ValidationError("field refers to unknown node id " + std::to_string(id));
        const NodeIndex a = g.index_of(id);
        if (seen[a]) throw ValidationError("field lists node id " + std::to_string(id) + " twice");
        seen[a] = true;
        rows[a] = vector_value(entry.at("value"));
        if (dim == 0) dim = rows[a].size();
        if (rows[a].size() != dim) throw ValidationError("field values must share one dimension");
    }
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        if (!seen[a]) throw ValidationError("field has no value for node id " + std::to_string(g.id(a)));
    }
    NodeField out(g.num_nodes(), dim == 0 ? 1 : dim);
    for (NodeIndex a = 0; a < g.num_nodes(); ++a) {
        for (std::size_t k = 0; k < out.dim(); ++k) out.at(a, k) = rows[a][k];
    }
    return out;
}

inline json field_to_json(const WeightedGraph& g, const NodeField& u)
{
    json values = json::array();
    for (NodeIndex a = 0; a < u.size(); ++a) {
        values.push_back({{"id", g.id(a)}, {"value", std::vector<double>(u[a].begin(), u[a].end())}});
    }
    return {{"dim", u.dim()}, {"values", values}};
}

/// CSV with header id,v0,...; one row per node in graph order.
inline CsvTable field_to_csv(const WeightedGraph& g, const NodeField& u)
{
    CsvTable t;
    t.header.push_back("id");
    for (std::size_t k = 0; k < u.dim(); ++k) t.header.push_back("v" + std::to_string(k));
    for (NodeIndex a = 0; a < u.size(); ++a) {
        std::vector<std::string> row{std::to_string(g.id(a))};
        for (double x : u[a]) row.push_back(format_double(x));
        t.add(std::move(row));
    }
    return t;
}

inline NodeField field_from_csv(const WeightedGraph& g, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty field CSV");
    json values = json::array();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        json entry;
        try {
            entry["id"] = std::stoll(cell);
            json v = json::array();
            while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
            entry["value"] = v;
        } catch (const std::logic_error&) {
            throw ValidationError("malformed field CSV line: " + line);
        }
        values.push_back(entry);
    }
    return field_from_json(g, values);
}

inline NodeField read_field(const WeightedGraph& g, const std::filesystem::path& path)
{
    if (path.extension() == ".csv") return field_from_csv(g, read_text(path));
    return field_from_json(g, read_json(path));
}

/// {"values": [{"tail": id, "head": id, "value": x}, ...]}. An entry given
/// against the edge orientation is negated. Missing edges are zero.
inline EdgeField edge_field_from_json(const WeightedGraph& g, const json& j)
{
    std::map<std::pair<NodeId, NodeId>, EdgeIndex> lookup;
    for (EdgeIndex k = 0; k < g.num_edges(); ++k) lookup.emplace(std::pair{g.id(g.edge(k).tail), g.id(g.edge(k).head)}, k);
    const auto& values = j.is_array() ? j : j.at("values");
    std::size_t dim = 0;
    std::vector<std::pair<EdgeIndex, std::vector<double>>> entries;
    for (const auto& e : values) {
        const auto tail = require<NodeId>(e, "tail");
        const auto head = require<NodeId>(e, "head");
        auto v = vector_value(e.at("value"));
        auto it = lookup.find({tail, head});
        if (it == lookup.end()) {
            it = lookup.find({head, tail});
            if (it == lookup.end()) {
                throw ValidationError("edge field refers to missing edge " + std::to_string(tail) + "-" +
                                      std::to_string(head));
            }
            for (double& x : v) x = -x;
        }
        if (dim == 0) dim = v.size();
        if (v.size() != dim) throw ValidationError("edge field values must share one dimension");
        entries.emplace_back(it->second, std::move(v));
    }
    EdgeField out(g.num_edges(), dim == 0 ? 1 : dim);
    for (const auto& [k, v] : entries) {
        for (std::size_t c = 0; c < v.size(); ++c) out.at(k, c) = v[c];
    }
    return out;
}

// ---------------------------------------------------------------------------
// model profiles

inline ModelProfile profile_from_json(const json& j)
{
    const auto kind = require<std::string>(j, "kind");
    if (kind == "power") return ModelProfile::power(require<double>(j, "k"));
    if (kind == "exponential") return ModelProfile::exponential(require<double>(j, "a"));
    if (kind == "tabulated") {
        std::vector<std::pair<double, double>> samples;
        for (const auto& s : j.at("samples")) {
            if (s.is_array() && s.size() == 2) {
                samples.emplace_back(s[0].get<double>(), s[1].get<double>());
            } else {
                samples.emplace_back(require<double>(s, "r"), require<double>(s, "sigma"));
            }
        }
        return ModelProfile::tabulated(std::move(samples));
    }
    throw ValidationError("unknown profile kind '" + kind + "'");
}

/// "power:K" or "exponential:A".
inline ModelProfile profile_from_string(const std::string& s)
{
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("profile must look like power:K or exponential:A");
    const std::string kind = s.substr(0, colon);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(s.substr(colon + 1), &used);
        if (used != s.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error&) {
        throw ValidationError("bad profile parameter in '" + s + "'");
    }
    if (kind == "power") return ModelProfile::power(value);
    if (kind == "exponential") return ModelProfile::exponential(value);
    throw ValidationError("unknown profile kind '" + kind + "'");
}

inline json profile_to_json(const ModelProfile& profile)
{
    return std::visit(
        [](const auto& prof) -> json {
            using T = std::decay_t<decltype(prof)>;
            if constexpr (std::is_same_v<T, PowerProfile>) {
                return {{"kind", "power"}, {"k", prof.k}};
            } else if constexpr (std::is_same_v<T, ExponentialProfile>) {
                return {{"kind", "exponential"}, {"a", prof.a}};
            } else {
                json samples = json::array();
                for (const auto& [r, s] : prof.samples) samples.push_back({r, s});
                return {{"kind", "tabulated"}, {"samples", samples}};
            }
        },
        profile.kind());
}

// ---------------------------------------------------------------------------
// solver

inline SolverOptions solver_options_from_json(const json& j, SolverOptions o = {})
{
    if (j.is_null()) return o;
    o.tolerance = get_or(j, "tolerance", o.tolerance);
    o.max_iterations = get_or(j, "max_iterations", o.max_iterations);
    o.regularization = get_or(j, "regularization", o.regularization);
    o.step_tolerance = get_or(j, "step_tolerance", o.step_tolerance);
    o.max_polish_iterations = get_or(j, "max_polish_iterations", o.max_polish_iterations);
    return o;
}

inline json solver_options_to_json(const SolverOptions& o)
{
    return {{"tolerance", o.tolerance},
            {"max_iterations", o.max_iterations},
            {"regularization", o.regularization},
            {"step_tolerance", o.step_tolerance},
            {"max_polish_iterations", o.max_polish_iterations}};
}

/// Problem spec. The graph is inline ("graph") or a path relative to base
/// ("graph_file"). dirichlet/source/gauge refer to node ids.
inline ProblemSpec problem_from_json(const json& j, const std::filesystem::path& base = {})
{
    ProblemSpec spec;
    if (j.contains("graph")) {
        spec.graph = graph_from_json(j.at("graph"));
    } else if (j.contains("graph_file")) {
        spec.graph = graph_from_json(read_json(base / require<std::string>(j, "graph_file")));
    } else {
        throw ValidationError("problem spec needs 'graph' or 'graph_file'");
    }
    const WeightedGraph& g = spec.graph;
    spec.p = PExponent(get_or(j, "p", 2.0));
    spec.dim = get_or<std::size_t>(j, "dim", 1);
    if (spec.dim == 0) throw ValidationError("dim must be >= 1");
    auto node = [&](const json& e) {
        const auto id = require<NodeId>(e, "id");
        if (!g.contains(id)) throw ValidationError("unknown node id " + std::to_string(id));
        return g.index_of(id);
    };
    auto value = [&](const json& e) {
        auto v = vector_value(e.at("value"));
        if (v.size() != spec.dim) throw ValidationError("value dimension does not match dim");
        return v;
    };
    if (j.contains("source")) {
        spec.source = NodeField(g.num_nodes(), spec.dim);
        for (const auto& e : j.at("source")) {
            const NodeIndex a = node(e);
            const auto v = value(e);
            for (std::size_t k = 0; k < spec.dim; ++k) spec.source.at(a, k) = v[k];
        }
    }
    if (j.contains("dirichlet")) {
        for (const auto& e : j.at("dirichlet")) {
            if (!spec.dirichlet.emplace(node(e), value(e)).second) {
                throw ValidationError("duplicate Dirichlet node");
            }
        }
    }
    if (j.contains("gauge") && !j.at("gauge").is_null()) {
        const auto& e = j.at("gauge");
        spec.gauge = GaugePin{node(e), value(e)};
    }
    if (j.contains("initial_guess")) spec.initial_guess = field_from_json(g, j.at("initial_guess"));
    spec.options = solver_options_from_json(get_or<json>(j, "options", json()));
    return spec;
}

inline json solve_report_to_json(const WeightedGraph& g, const SolveReport& r, double p)
{
    return {{"schema", "pplap.solve_report"},
            {"schema_version", schema_version},
            {"p", p},
            {"converged", r.converged},
            {"message", r.message},
            {"iterations", r.iterations},
            {"residual", nullable(r.residual)},
            {"tolerance", r.tolerance},
            {"energy", nullable(r.energy)},
            {"solution", field_to_json(g, r.solution)}};
}

// ---------------------------------------------------------------------------
// families and experiments

/// Custom family directory: family.json = {"center": id, "truncations": {"N": "file.json", ...}}.
inline ExhaustionFamily custom_family_from_directory(const std::filesystem::path& dir)
{
    const json meta = read_json(dir / "family.json");
    std::map<int, WeightedGraph> truncs;
    for (const auto& [key, file] : meta.at("truncations").items()) {
        int N = 0;
        try {
            N = std::stoi(key);
        } catch (const std::logic_error&) {
            throw ValidationError("truncation key '" + key + "' is not an integer");
        }
        truncs.emplace(N, graph_from_json(read_json(dir / file.get<std::string>())));
    }
    return ExhaustionFamily::custom(std::move(truncs), require<NodeId>(meta, "center"));
}

/// "path", "line", "lattice2", "z2", "lattice:3", or a custom directory given separately.
inline ExhaustionFamily family_from_string(const std::string& s)
{
    if (s == "path") return ExhaustionFamily::path();
    if (s == "line") return ExhaustionFamily::line();
    for (int d = 1; d <= 3; ++d) {
        const std::string ds = std::to_string(d);
        if (s == "lattice" + ds || s == "z" + ds || s == "Z" + ds || s == "lattice:" + ds) {
            return ExhaustionFamily::lattice(d);
        }
    }
    throw ValidationError("unknown family '" + s + "' (path, line, lattice1..3, or a custom directory)");
}

inline ExhaustionFamily family_from_json(const json& j, const std::filesystem::path& base)
{
    if (j.is_string()) return family_from_string(j.get<std::string>());
    const auto kind = require<std::string>(j, "kind");
    if (kind == "lattice") return ExhaustionFamily::lattice(require<int>(j, "dimension"));
    if (kind == "custom") return custom_family_from_directory(base / require<std::string>(j, "directory"));
    return family_from_string(kind);
}

inline ExperimentMode mode_from_string(const std::string& s)
{
    if (s == "scalar" || s == "scalar-inequality") return ExperimentMode::Scalar;
    if (s == "map" || s == "map-equality") return ExperimentMode::Map;
    if (s == "constancy") return ExperimentMode::Constancy;
    if (s == "counterexample") return ExperimentMode::Counterexample;
    throw ValidationError("unknown experiment mode '" + s + "'");
}

inline ExperimentSpec experiment_from_json(const json& j, const std::filesystem::path& base = {})
{
    static const std::vector<std::string> known{
        "mode", "family", "p", "radii", "v_recipe", "u_recipe", "target_dim", "shift", "source_bump", "boundary",
        "bump_radius", "bump_amplitude", "inner_radius", "osc_tolerance", "decay_factor", "coercivity_tolerance",
        "min_levels", "probe_capacity", "v_files", "u_files", "solver"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ValidationError("unknown experiment field '" + key + "'");
        }
    }
    ExperimentSpec s;
    if (j.contains("mode")) s.mode = mode_from_string(require<std::string>(j, "mode"));
    s.family = family_from_json(j.at("family"), base);
    s.p = get_or(j, "p", s.p);
    s.radii = require<std::vector<int>>(j, "radii");
    s.v_recipe = get_or(j, "v_recipe", s.v_recipe);
    s.u_recipe = get_or(j, "u_recipe", s.u_recipe);
    s.target_dim = get_or(j, "target_dim", s.target_dim);
    s.shift = get_or(j, "shift", s.shift);
    s.source_bump = get_or(j, "source_bump", s.source_bump);
    const auto boundary = get_or<std::string>(j, "boundary", "matched");
    if (boundary == "matched") {
        s.boundary = BoundaryMode::Matched;
    } else if (boundary == "gauge") {
        s.boundary = BoundaryMode::Gauge;
    } else {
        throw ValidationError("boundary must be matched or gauge");
    }
    s.bump_radius = get_or(j, "bump_radius", s.bump_radius);
    s.bump_amplitude = get_or(j, "bump_amplitude", s.bump_amplitude);
    s.inner_radius = get_or(j, "inner_radius", s.inner_radius);
    s.osc_tolerance = get_or(j, "osc_tolerance", s.osc_tolerance);
    s.decay_factor = get_or(j, "decay_factor", s.decay_factor);
    s.coercivity_tolerance = get_or(j, "coercivity_tolerance", s.coercivity_tolerance);
    s.min_levels = get_or(j, "min_levels", s.min_levels);
    s.probe_capacity = get_or(j, "probe_capacity", s.probe_capacity);
    s.solver = solver_options_from_json(get_or<json>(j, "solver", json()));
    auto load_files = [&](const char* key, std::map<int, NodeField>& out) {
        if (!j.contains(key)) return;
        for (const auto& [k, file] : j.at(key).items()) {
            const int N = std::stoi(k);
            const Truncation t = s.family.truncate(N);
            out.emplace(N, read_field(t.graph, base / file.get<std::string>()));
        }
    };
    load_files("v_files", s.v_fields);
    load_files("u_files", s.u_fields);
    return s;
}

// ---------------------------------------------------------------------------
// reports

inline json inequality_summary_to_json(const InequalitySummary& s)
{
    return {{"schema", "pplap.inequality_summary"},
            {"schema_version", schema_version},
            {"seed", s.seed},
            {"samples", s.samples},
            {"p_values", s.p_values},
            {"min_dim", s.min_dim},
            {"max_dim", s.max_dim},
            {"tolerance", s.tolerance},
            {"min_lindqvist_relative_gap", nullable(s.min_lindqvist_relative)},
            {"min_mhck_relative_gap", nullable(s.min_mhck_relative)},
            {"max_p2_relative_gap", s.max_p2_relative},
            {"min_classical_gap", nullable(s.min_classical_gap)},
            {"max_pairing_mismatch", s.max_pairing_mismatch},
            {"failures", s.failures},
            {"min_gap", nullable(std::min(s.min_lindqvist_relative, s.min_mhck_relative))}};
}

inline json verdict_to_json(const ModelProfile& profile, int m, double p, const ParabolicityVerdict& v)
{
    json integrals = json::array();
    for (const auto& [R, I] : v.integral_values) integrals.push_back({{"R", R}, {"integral", nullable(I)}});
    return {{"schema", "pplap.parabolicity_verdict"},
            {"schema_version", schema_version},
            {"profile", profile_to_json(profile)},
            {"m", m},
            {"p", p},
            {"verdict", to_string(v.verdict)},
            {"tail_exponent_estimate", nullable(v.tail_exponent_estimate)},
            {"r0", v.r0},
            {"r_max", v.r_max},
            {"delta", v.delta},
            {"integral_values", integrals}};
}

inline CsvTable verdict_to_csv(const ParabolicityVerdict& v)
{
    CsvTable t{{"R", "integral"}, {}};
    for (const auto& [R, I] : v.integral_values) t.add({format_double(R), format_double(I)});
    return t;
}

inline json knr_to_json(const KnrReport& r, const std::string& recipe)
{
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"N", row.N},
                        {"nodes", row.nodes},
                        {"norm", nullable(row.norm)},
                        {"negative_mass", nullable(row.negative_mass)},
                        {"total_divergence", nullable(row.total_divergence)}});
    }
    return {{"schema", "pplap.knr_report"},
            {"schema_version", schema_version},
            {"family", r.family},
            {"p", r.p},
            {"recipe", recipe},
            {"rows", rows},
            {"norm_growth", nullable(r.norm_growth)},
            {"negative_mass_growth", nullable(r.negative_mass_growth)},
            {"norm_extrapolated", nullable(r.norm_extrapolated)},
            {"condition_a", r.condition_a},
            {"condition_b", r.condition_b},
            {"condition_c", r.condition_c},
            {"verdict", to_string(r.verdict)},
            {"thresholds",
             {{"max_relative_growth", r.thresholds.max_relative_growth},
              {"min_total_divergence", r.thresholds.min_total_divergence},
              {"zero_floor", r.thresholds.zero_floor}}}};
}

inline CsvTable knr_to_csv(const KnrReport& r)
{
    CsvTable t{{"N", "nodes", "norm", "negative_mass", "total_divergence"}, {}};
    for (const auto& row : r.rows) {
        t.add({std::to_string(row.N), std::to_string(row.nodes), format_double(row.norm),
               format_double(row.negative_mass), format_double(row.total_divergence)});
    }
    return t;
}

inline json comparison_to_json(const ComparisonReport& r)
{
    json rows = json::array();
    for (const auto& row : r.rows) {
        json levels = json::array();
        for (const auto& l : row.levels) {
            const auto& a = l.audit;
            levels.push_back({{"n", l.n},
                              {"T", a.T},
                              {"norm_power", a.norm_power},
                              {"norm_bound", a.norm_bound},
                              {"negative_mass", a.negative_mass},
                              {"negative_mass_bound", a.negative_mass_bound},
                              {"tail_energy", a.tail_energy},
                              {"equation_defect", a.equation_defect},
                              {"inner_coercivity", a.inner_coercivity},
                              {"total_divergence", a.total_divergence},
                              {"norm_ok", a.norm_ok},
                              {"negative_mass_ok", a.negative_mass_ok},
                              {"tail_bound_ok", a.tail_bound_ok},
                              {"coercivity_ok", a.coercivity_ok},
                              {"tail_criterion", l.tail_criterion}});
        }
        rows.push_back({{"N", row.N},
                        {"nodes", row.nodes},
                        {"inner_radius", row.inner_radius},
                        {"osc", row.osc},
                        {"A", row.A},
                        {"energy_u", row.energy_u},
                        {"energy_v", row.energy_v},
                        {"solved", row.solved},
                        {"solver_converged", row.solver_converged},
                        {"solver_iterations", row.solver_iterations},
                        {"solver_residual", row.solver_residual},
                        {"sbp_residual", row.sbp_residual},
                        {"coercivity_pairing", row.coercivity_pairing},
                        {"coercivity_bound", row.coercivity_bound},
                        {"coercivity_ok", row.coercivity_ok},
                        {"identity_residual", row.identity_residual},
                        {"min_interior_plap_gap", nullable(row.min_interior_plap_gap)},
                        {"capacity", row.capacity ? json(*row.capacity) : json(nullptr)},
                        {"levels", levels}});
    }
    return {{"schema", "pplap.comparison_report"},
            {"schema_version", schema_version},
            {"mode", to_string(r.mode)},
            {"family", r.family},
            {"p", r.p},
            {"target_dim", r.target_dim},
            {"u_recipe", r.u_recipe},
            {"v_recipe", r.v_recipe},
            {"boundary", to_string(r.boundary)},
            {"rows", rows},
            {"conclusion", to_string(r.conclusion)},
            {"observed_decay_factor", nullable(r.observed_decay_factor)},
            {"parabolic_at_scale", r.parabolic_at_scale ? json(*r.parabolic_at_scale) : json(nullptr)},
            {"checks_ok", r.checks_ok},
            {"osc_tolerance", r.osc_tolerance},
            {"decay_factor", r.decay_factor}};
}

inline CsvTable comparison_to_csv(const ComparisonReport& r)
{
    CsvTable t{{"N", "osc", "energy_u", "energy_v", "solver_residual", "sbp_residual", "identity_residual",
                "coercivity_pairing", "coercivity_bound", "capacity"},
               {}};
    for (const auto& row : r.rows) {
        t.add({std::to_string(row.N), format_double(row.osc), format_double(row.energy_u),
               format_double(row.energy_v), format_double(row.solver_residual), format_double(row.sbp_residual),
               format_double(row.identity_residual), format_double(row.coercivity_pairing),
               format_double(row.coercivity_bound), row.capacity ? format_double(*row.capacity) : ""});
    }
    return t;
}

// ---------------------------------------------------------------------------
// SVG

/// Single-series line plot. With log_y, nonpositive values are clamped to
/// the smallest positive value in the series.
inline std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& title,
                                 const std::string& x_label, const std::string& y_label, bool log_y)
{
    if (xs.size() != ys.size() || xs.empty()) throw ValidationError("plot needs matching, nonempty series");
    constexpr double W = 480, H = 320, L = 64, R = 16, T = 32, B = 48;
    std::vector<double> yv = ys;
    if (log_y) {
        double pos = std::numeric_limits<double>::infinity();
        for (double y : ys) {
            if (y > 0.0) pos = std::min(pos, y);
        }
        if (!std::isfinite(pos)) pos = 1e-300;
        for (double& y : yv) y = std::log10(std::max(y, pos));
    }
    auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    auto [ymin, ymax] = std::minmax_element(yv.begin(), yv.end());
    const double x0 = *xmin, x1 = *xmax > *xmin ? *xmax : *xmin + 1.0;
    const double y0 = *ymin, y1 = *ymax > *ymin ? *ymax : *ymin + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    char buf[128];
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\">\n";
    s += "<rect width=\"480\" height=\"320\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"20\" font-size=\"14\">", L);
    s += buf + title + "</text>\n";
    std::snprintf(buf, sizeof buf, "<path d=\"M%g %g V%g H%g\" stroke=\"black\" fill=\"none\"/>\n", L, T, H - B, W - R);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\">", (W + L) / 2 - 10, H - 12);
    s += buf + x_label + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"12\" y=\"%g\" font-size=\"12\" transform=\"rotate(-90 12 %g)\">",
                  (H - B + T) / 2, (H - B + T) / 2);
    s += buf + (log_y ? "log10 " + y_label : y_label) + "</text>\n";
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(xs[i]), py(yv[i]));
        s += buf;
    }
    s += "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"steelblue\"/>\n", px(xs[i]),
                      py(yv[i]));
        s += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.3f\" y=\"%g\" font-size=\"10\">%g</text>\n", px(xs[i]) - 4,
                      H - B + 14, xs[i]);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%.3f\" font-size=\"10\">%.3g</text>\n", py(y1) + 4, y1);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%.3f\" font-size=\"10\">%.3g</text>\n", py(y0) + 4, y0);
    s += buf;
    s += "</svg>\n";
    return s;
}

inline std::string comparison_plot(const ComparisonReport& r)
{
    std::vector<double> xs, ys;
    for (const auto& row : r.rows) {
        xs.push_back(row.N);
        ys.push_back(row.osc);
    }
    return svg_line_plot(xs, ys, std::string("osc(u - v), ") + to_string(r.mode) + " on " + r.family, "N", "osc",
                         true);
}

}  // namespace pplap::io
