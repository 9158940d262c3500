#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& env = {})
{
    const std::string cmd = env + " " + PPLAP_CLI_PATH + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("pplap_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string data = PPLAP_DATA_DIR;

}  // namespace

TEST(Cli, IneqSummary)
{
    const auto dir = scratch("ineq");
    const auto r = run("ineq --p 3 --samples 100000 --seed 7 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_GE(j["min_gap"].get<double>(), -1e-10);
    EXPECT_EQ(j["seed"], 7);
    EXPECT_TRUE(fs::exists(dir / "ineq.json"));
}

TEST(Cli, ModelClassify)
{
    const auto dir = scratch("model");
    const auto r = run("model classify --profile power:1 --m 2 --p 2 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["verdict"], "Parabolic");
    EXPECT_EQ(slurp(dir / "model.csv").substr(0, 11), "R,integral\n");
}

TEST(Cli, SolveSymmetricPath)
{
    const auto dir = scratch("solve");
    const auto r = run("solve --problem " + data + "/path3_problem.json --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(slurp(dir / "solution.csv"), "id,v0\n0,0\n1,0.5\n2,1\n");
}

TEST(Cli, OutputDirectoryEnvironmentOverride)
{
    const auto dir = scratch("env");
    const auto other = scratch("env_ignored");
    const auto r = run("solve --problem " + data + "/path3_problem.json --out " + other.string(),
                       "PPLAP_OUTPUT_DIR=" + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir / "solve.json"));
    EXPECT_FALSE(fs::exists(other / "solve.json"));
}

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("ineq --no-such-flag").code, 2);
    EXPECT_EQ(run("model classify --profile power:1 --m 2").code, 2);
}

TEST(Cli, ValidationErrorsExitTwo)
{
    const auto dir = scratch("invalid");
    EXPECT_EQ(run("solve --problem /nonexistent.json --out " + dir.string()).code, 2);
    EXPECT_EQ(run("model classify --profile power:1 --m 2 --p 1.5 --out " + dir.string()).code, 2);
    EXPECT_EQ(run("knr audit --family path --radii 4,8 --recipe zero --out " + dir.string()).code, 2);
}

TEST(Cli, NumericalFailureExitsThreeWithDiagnostic)
{
    const auto dir = scratch("numerical");
    std::ofstream(dir / "p.json") << R"({
      "graph": {"nodes": [{"id":0,"boundary":true},{"id":1},{"id":2},{"id":3,"boundary":true}],
                "edges": [{"tail":0,"head":1},{"tail":1,"head":2},{"tail":2,"head":3}]},
      "p": 6,
      "source": [{"id":1,"value":5}],
      "dirichlet": [{"id":0,"value":0},{"id":3,"value":1}],
      "options": {"max_iterations": 1}
    })";
    const auto r = run("solve --problem " + (dir / "p.json").string() + " --out " + dir.string());
    EXPECT_EQ(r.code, 3);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["error"]["kind"], "numerical");
    EXPECT_FALSE(j["converged"].get<bool>());
}

TEST(Cli, KnrAndCapacity)
{
    const auto dir = scratch("knr");
    auto r = run("knr audit --family lattice3 --p 2 --recipe green --radii 6,10,14 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["verdict"], "WitnessNonParabolic");
    r = run("capacity --family path --p 3 --radii 4,8 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(json::parse(r.out)["rows"][1]["capacity"].get<double>(), 1.0 / 64.0, 1e-12);
}

TEST(Cli, CompareWritesJsonCsvSvg)
{
    const auto dir = scratch("compare");
    const auto r = run("compare scalar --spec " + data + "/scalar_path.json --emit json,csv,svg --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["conclusion"], "oscillation-vanishing");
    EXPECT_TRUE(fs::exists(dir / "compare_scalar.json"));
    EXPECT_TRUE(fs::exists(dir / "compare_scalar.csv"));
    EXPECT_TRUE(fs::exists(dir / "compare_scalar.svg"));
    EXPECT_EQ(run("compare map --spec " + data + "/scalar_path.json --out " + dir.string()).code, 2);
}

TEST(Cli, RepeatedRunsAreByteIdentical)
{
    const auto a = scratch("repeat_a");
    const auto b = scratch("repeat_b");
    for (const auto& d : {a, b}) {
        ASSERT_EQ(run("compare map --spec " + data + "/map_path.json --out " + d.string()).code, 0);
        ASSERT_EQ(run("ineq --samples 5000 --seed 3 --out " + d.string()).code, 0);
    }
    for (const char* f : {"compare_map.json", "compare_map.csv", "ineq.json"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}
