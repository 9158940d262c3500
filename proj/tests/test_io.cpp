#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pplap/io.hpp"
#include "test_support.hpp"

namespace io = pplap::io;
using pplap::NodeField;

TEST(Io, GraphRoundTripIsExact)
{
    const pplap::WeightedGraph g({0.1, 1.0 / 3.0, 2.5e-300}, {{0, 1, 0.7}, {2, 1, 1e10 / 7.0}}, {1, 0, 0},
                                 {-9007199254740993LL, 42, 9007199254740993LL});
    const auto text = io::dump(io::graph_to_json(g));
    const auto h = io::graph_from_json(io::json::parse(text));
    ASSERT_EQ(h.num_nodes(), 3u);
    for (std::size_t a = 0; a < 3; ++a) {
        EXPECT_EQ(h.id(a), g.id(a));
        EXPECT_EQ(h.measure(a), g.measure(a));
        EXPECT_EQ(h.is_boundary(a), g.is_boundary(a));
    }
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(h.edge(k).tail, g.edge(k).tail);
        EXPECT_EQ(h.edge(k).head, g.edge(k).head);
        EXPECT_EQ(h.edge(k).weight, g.edge(k).weight);
    }
}

TEST(Io, FieldRoundTripJsonAndCsv)
{
    std::mt19937_64 rng(6);
    const auto g = testing_support::random_graph(rng, 20, 10);
    const NodeField u = testing_support::random_field(rng, 20, 3, 1e3);
    EXPECT_EQ(io::field_from_json(g, io::json::parse(io::dump(io::field_to_json(g, u)))), u);
    EXPECT_EQ(io::field_from_csv(g, io::field_to_csv(g, u).str()), u);
}

TEST(Io, FieldErrors)
{
    const auto g = testing_support::unit_path(2);
    EXPECT_THROW(io::field_from_json(g, io::json::parse(R"({"values":[{"id":0,"value":1}]})")),
                 pplap::ValidationError);
    EXPECT_THROW(io::field_from_json(g, io::json::parse(R"({"values":[{"id":0,"value":1},{"id":5,"value":1}]})")),
                 pplap::ValidationError);
    EXPECT_THROW(io::field_from_json(g, io::json::parse(R"({"values":[{"id":0,"value":1},{"id":1,"value":[1,2]}]})")),
                 pplap::ValidationError);
}

TEST(Io, CsvFormatting)
{
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_double(0.5), "0.5");
    io::CsvTable t{{"a", "b"}, {}};
    t.add({"1", "2"});
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
    EXPECT_THROW(t.add({"1"}), pplap::ValidationError);
}

TEST(Io, ProfileParsing)
{
    const auto p = io::profile_from_string("power:1");
    EXPECT_EQ(std::get<pplap::PowerProfile>(p.kind()).k, 1.0);
    EXPECT_THROW(io::profile_from_string("power"), pplap::ValidationError);
    EXPECT_THROW(io::profile_from_string("power:x"), pplap::ValidationError);
    EXPECT_THROW(io::profile_from_string("cubic:1"), pplap::ValidationError);
    const auto t = io::profile_from_json(io::json::parse(R"({"kind":"tabulated","samples":[[1,1],[10,10]]})"));
    const auto back = io::profile_from_json(io::profile_to_json(t));
    EXPECT_EQ(std::get<pplap::TabulatedProfile>(back.kind()).samples.size(), 2u);
}

TEST(Io, ProblemSpec)
{
    const auto j = io::json::parse(R"({
      "graph": {"nodes": [{"id": 0, "boundary": true}, {"id": 1}, {"id": 2, "boundary": true}],
                "edges": [{"tail": 0, "head": 1}, {"tail": 1, "head": 2, "weight": 3}]},
      "p": 2,
      "dirichlet": [{"id": 0, "value": 0}, {"id": 2, "value": [1]}]
    })");
    const auto spec = io::problem_from_json(j);
    EXPECT_EQ(spec.dirichlet.size(), 2u);
    const auto r = pplap::solve(spec);
    EXPECT_NEAR(r.solution.at(1), 0.75, 1e-12);

    auto bad = j;
    bad["dirichlet"][0]["id"] = 9;
    EXPECT_THROW(io::problem_from_json(bad), pplap::ValidationError);
    bad = j;
    bad["p"] = 1.5;
    EXPECT_THROW(io::problem_from_json(bad), pplap::ValidationError);
}

TEST(Io, ExperimentSpec)
{
    const auto s = io::experiment_from_json(io::json::parse(
        R"({"mode":"map","family":{"kind":"lattice","dimension":2},"p":3,"radii":[4,6,8],"target_dim":2,"shift":[1,2]})"));
    EXPECT_EQ(s.mode, pplap::ExperimentMode::Map);
    EXPECT_EQ(s.family.name(), "lattice2");
    EXPECT_EQ(s.shift.size(), 2u);
    EXPECT_THROW(io::experiment_from_json(io::json::parse(R"({"family":"path","radii":[1,2,3],"bogus":1})")),
                 pplap::ValidationError);
    EXPECT_THROW(io::experiment_from_json(io::json::parse(R"({"family":"moon","radii":[1,2,3]})")),
                 pplap::ValidationError);
}

TEST(Io, EdgeFieldOrientation)
{
    const auto g = testing_support::unit_path(3);
    const auto x = io::edge_field_from_json(
        g, io::json::parse(R"({"values":[{"tail":0,"head":1,"value":2},{"tail":2,"head":1,"value":5}]})"));
    EXPECT_EQ(x.at(0), 2.0);
    EXPECT_EQ(x.at(1), -5.0);
    EXPECT_THROW(io::edge_field_from_json(g, io::json::parse(R"([{"tail":0,"head":2,"value":1}])")),
                 pplap::ValidationError);
}

TEST(Io, ReportsSerialize)
{
    pplap::ExperimentSpec s;
    s.radii = {4, 6, 8};
    s.p = 3.0;
    const auto rep = pplap::run_experiment(s);
    const auto j = io::comparison_to_json(rep);
    EXPECT_EQ(j["rows"].size(), 3u);
    EXPECT_EQ(j["conclusion"], "oscillation-vanishing");
    EXPECT_EQ(io::comparison_to_csv(rep).rows.size(), 3u);
    const auto svg = io::comparison_plot(rep);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
}
