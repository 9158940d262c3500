// pplap command-line front end.
//
// Exit codes: 0 success, 2 invalid input or usage, 3 numerical failure.
// The main JSON result goes to stdout; files go to the output directory
// (--out, overridden by PPLAP_OUTPUT_DIR, default ".").

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pplap/io.hpp"
#include "pplap/pplap.hpp"

namespace fs = std::filesystem;
using pplap::io::json;

namespace {

struct RunConfig {
    std::string out_dir = ".";
    std::vector<std::string> emit{"json", "csv"};
    std::uint64_t seed = 0;

    [[nodiscard]] fs::path dir() const
    {
        if (const char* env = std::getenv("PPLAP_OUTPUT_DIR"); env && *env) return env;
        return out_dir;
    }
    [[nodiscard]] bool wants(const std::string& kind) const
    {
        return std::find(emit.begin(), emit.end(), kind) != emit.end();
    }
};

class Emitter {
public:
    explicit Emitter(const RunConfig& cfg) : cfg_(cfg) {}

    void json_result(const std::string& stem, json j) const
    {
        j["pplap_version"] = PPLAP_VERSION;
        const std::string text = pplap::io::dump(j);
        std::cout << text;
        if (cfg_.wants("json")) pplap::io::write_text(cfg_.dir() / (stem + ".json"), text);
    }
    void csv(const std::string& stem, const pplap::io::CsvTable& t) const
    {
        if (cfg_.wants("csv")) pplap::io::write_text(cfg_.dir() / (stem + ".csv"), t.str());
    }
    void svg(const std::string& stem, const std::string& text) const
    {
        if (cfg_.wants("svg")) pplap::io::write_text(cfg_.dir() / (stem + ".svg"), text);
    }

private:
    const RunConfig& cfg_;
};

// Raised after the diagnostic report has been emitted.
struct ReportedNumericalFailure : pplap::NumericalError {
    using pplap::NumericalError::NumericalError;
};

pplap::ExhaustionFamily make_family(const std::string& family, const std::string& family_dir)
{
    if (!family_dir.empty()) return pplap::io::custom_family_from_directory(family_dir);
    return pplap::io::family_from_string(family);
}

void add_emit(CLI::App& app, RunConfig& cfg)
{
    app.add_option("--out", cfg.out_dir, "Output directory (PPLAP_OUTPUT_DIR overrides)");
    app.add_option("--emit", cfg.emit, "Files to write: json, csv, svg")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv", "svg"}));
}

// ---------------------------------------------------------------------------

struct IneqArgs {
    std::vector<double> p{2.0, 2.5, 3.0, 4.0, 6.0, 10.0};
    std::size_t samples = 100000;
    int dmin = 1;
    int dmax = 8;
    double tolerance = 1e-10;
};

void run_ineq(const IneqArgs& a, const RunConfig& cfg)
{
    const auto s = pplap::sample_inequalities(a.p, a.dmin, a.dmax, a.samples, cfg.seed, a.tolerance);
    Emitter(cfg).json_result("ineq", pplap::io::inequality_summary_to_json(s));
}

struct ModelArgs {
    std::string profile;
    std::string profile_file;
    int m = 2;
    double p = 2.0;
    pplap::ClassifyOptions opts{};
};

void run_model(const ModelArgs& a, const RunConfig& cfg)
{
    if (a.profile.empty() == a.profile_file.empty()) {
        throw pplap::ValidationError("give exactly one of --profile and --profile-file");
    }
    const pplap::ModelProfile profile = a.profile.empty() ? pplap::io::profile_from_json(pplap::io::read_json(a.profile_file))
                                                          : pplap::io::profile_from_string(a.profile);
    const auto v = pplap::classify_model(profile, a.m, pplap::PExponent(a.p), a.opts);
    Emitter e(cfg);
    e.json_result("model", pplap::io::verdict_to_json(profile, a.m, a.p, v));
    e.csv("model", pplap::io::verdict_to_csv(v));
}

struct PlapArgs {
    std::string graph;
    std::string field;
    double p = 2.0;
};

void run_plap(const PlapArgs& a, const RunConfig& cfg)
{
    const auto g = pplap::io::graph_from_json(pplap::io::read_json(a.graph));
    const auto u = pplap::io::read_field(g, a.field);
    const pplap::PExponent p(a.p);
    const auto lap = pplap::p_laplacian(g, u, p);
    json j{{"schema", "pplap.plap_report"},
           {"schema_version", pplap::io::schema_version},
           {"p", a.p},
           {"energy", pplap::p_energy(g, u, p)},
           {"p_laplacian", pplap::io::field_to_json(g, lap)}};
    Emitter e(cfg);
    e.json_result("plap", j);
    e.csv("plap", pplap::io::field_to_csv(g, lap));
}

void run_solve(const std::string& problem, const RunConfig& cfg)
{
    const fs::path path(problem);
    const auto spec = pplap::io::problem_from_json(pplap::io::read_json(path), path.parent_path());
    const auto rep = pplap::solve(spec);
    Emitter e(cfg);
    json j = pplap::io::solve_report_to_json(spec.graph, rep, spec.p.value());
    if (!rep.converged) j["error"] = {{"kind", "numerical"}, {"message", rep.message}};
    e.json_result("solve", j);
    e.csv("solution", pplap::io::field_to_csv(spec.graph, rep.solution));
    if (!rep.converged) throw ReportedNumericalFailure("solver did not converge: " + rep.message);
}

struct KnrArgs {
    std::string family = "path";
    std::string family_dir;
    double p = 2.0;
    std::string recipe = "green";
    std::string fields_dir;
    std::vector<int> radii;
    pplap::KnrThresholds th{};
};

void run_knr(const KnrArgs& a, const RunConfig& cfg)
{
    const auto family = make_family(a.family, a.family_dir);
    const pplap::PExponent p(a.p);
    pplap::FieldBuilder builder;
    if (a.recipe == "zero") {
        builder = [](const pplap::Truncation& t) { return pplap::EdgeField(t.graph.num_edges(), 1); };
    } else if (a.recipe == "constant") {
        builder = [](const pplap::Truncation& t) { return pplap::EdgeField(t.graph.num_edges(), 1, 1.0); };
    } else if (a.recipe == "green") {
        builder = [p](const pplap::Truncation& t) { return pplap::green_flux_field(t, p); };
    } else if (a.recipe == "from-fields") {
        if (a.fields_dir.empty()) throw pplap::ValidationError("from-fields needs --fields-dir");
        builder = [dir = fs::path(a.fields_dir)](const pplap::Truncation& t) {
            return pplap::io::edge_field_from_json(t.graph,
                                                   pplap::io::read_json(dir / (std::to_string(t.N) + ".json")));
        };
    } else {
        throw pplap::ValidationError("unknown recipe '" + a.recipe + "'");
    }
    std::vector<int> radii = a.radii;
    if (radii.empty()) radii = family.available_radii();
    const auto rep = pplap::knr_audit(family, radii, builder, p, a.th);
    Emitter e(cfg);
    e.json_result("knr", pplap::io::knr_to_json(rep, a.recipe));
    e.csv("knr", pplap::io::knr_to_csv(rep));
}

struct CompareArgs {
    std::string spec;
    std::optional<double> p;
    std::vector<int> radii;
};

void run_compare(const std::string& mode, const CompareArgs& a, const RunConfig& cfg)
{
    const fs::path path(a.spec);
    pplap::io::json j = pplap::io::read_json(path);
    if (j.contains("mode") && pplap::io::mode_from_string(j["mode"].get<std::string>()) != pplap::io::mode_from_string(mode)) {
        throw pplap::ValidationError("spec mode '" + j["mode"].get<std::string>() + "' conflicts with subcommand '" + mode + "'");
    }
    j["mode"] = mode;
    if (a.p) j["p"] = *a.p;
    if (!a.radii.empty()) j["radii"] = a.radii;
    const auto spec = pplap::io::experiment_from_json(j, path.parent_path());
    const auto rep = pplap::run_experiment(spec);
    const std::string stem = "compare_" + mode;
    Emitter e(cfg);
    e.json_result(stem, pplap::io::comparison_to_json(rep));
    e.csv(stem, pplap::io::comparison_to_csv(rep));
    e.svg(stem, pplap::io::comparison_plot(rep));
}

struct CapacityArgs {
    std::string family = "path";
    std::string family_dir;
    double p = 2.0;
    std::vector<int> radii;
};

void run_capacity(const CapacityArgs& a, const RunConfig& cfg)
{
    const auto family = make_family(a.family, a.family_dir);
    const pplap::PExponent p(a.p);
    std::vector<int> radii = a.radii;
    if (radii.empty()) radii = family.available_radii();
    if (radii.empty()) throw pplap::ValidationError("capacity needs --radii");
    json rows = json::array();
    pplap::io::CsvTable t{{"N", "capacity", "scaled"}, {}};
    std::vector<double> xs, ys;
    for (int N : radii) {
        const double c = pplap::capacity(family, p, N);
        const double scaled = c * std::pow(double(N), a.p - 1.0);
        rows.push_back({{"N", N}, {"capacity", c}, {"scaled", scaled}});
        t.add({std::to_string(N), pplap::io::format_double(c), pplap::io::format_double(scaled)});
        xs.push_back(N);
        ys.push_back(c);
    }
    Emitter e(cfg);
    e.json_result("capacity", {{"schema", "pplap.capacity_report"},
                               {"schema_version", pplap::io::schema_version},
                               {"family", family.name()},
                               {"p", a.p},
                               {"rows", rows}});
    e.csv("capacity", t);
    e.svg("capacity", pplap::io::svg_line_plot(xs, ys, "capacity on " + family.name(), "N", "cap", true));
}

void report_error(const char* kind, const std::string& message, const RunConfig& cfg, bool to_stdout)
{
    const json j{{"error", {{"kind", kind}, {"message", message}}}, {"pplap_version", PPLAP_VERSION}};
    if (to_stdout) {
        std::cout << pplap::io::dump(j);
        try {
            pplap::io::write_text(cfg.dir() / "error.json", pplap::io::dump(j));
        } catch (const std::exception&) {
        }
    }
    std::cerr << "pplap: " << message << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"p-Laplacian comparison toolkit on weighted graphs"};
    app.set_version_flag("--version", PPLAP_VERSION);
    app.require_subcommand(1);
    RunConfig cfg;

    IneqArgs ineq;
    auto* c_ineq = app.add_subcommand("ineq", "Seeded property run of the vector inequalities");
    c_ineq->add_option("--p", ineq.p, "Exponents (repeatable or comma separated)")->delimiter(',');
    c_ineq->add_option("--samples", ineq.samples)->check(CLI::PositiveNumber);
    c_ineq->add_option("--seed", cfg.seed);
    c_ineq->add_option("--dmin", ineq.dmin);
    c_ineq->add_option("--dmax", ineq.dmax);
    c_ineq->add_option("--tolerance", ineq.tolerance);
    add_emit(*c_ineq, cfg);

    ModelArgs model;
    auto* c_model = app.add_subcommand("model", "Rotationally symmetric model manifolds");
    c_model->require_subcommand(1);
    auto* c_classify = c_model->add_subcommand("classify", "p-parabolicity of a model manifold");
    c_classify->add_option("--profile", model.profile, "power:K or exponential:A");
    c_classify->add_option("--profile-file", model.profile_file, "Profile JSON");
    c_classify->add_option("--m", model.m, "Dimension")->required();
    c_classify->add_option("--p", model.p)->required();
    c_classify->add_option("--r0", model.opts.r0);
    c_classify->add_option("--rmax", model.opts.r_max);
    c_classify->add_option("--delta", model.opts.delta);
    add_emit(*c_classify, cfg);

    PlapArgs plap;
    auto* c_plap = app.add_subcommand("plap", "Evaluate the p-Laplacian of a field on a graph");
    c_plap->add_option("--graph", plap.graph)->required();
    c_plap->add_option("--field", plap.field, "Field JSON or CSV")->required();
    c_plap->add_option("--p", plap.p);
    add_emit(*c_plap, cfg);

    std::string problem;
    auto* c_solve = app.add_subcommand("solve", "Solve a p-Poisson problem");
    c_solve->add_option("--problem", problem)->required();
    add_emit(*c_solve, cfg);

    KnrArgs knr;
    auto* c_knr = app.add_subcommand("knr", "Kelvin-Nevanlinna-Royden criterion");
    c_knr->require_subcommand(1);
    auto* c_audit = c_knr->add_subcommand("audit", "Audit a vector field family across truncations");
    c_audit->add_option("--family", knr.family, "path, line, lattice1..3");
    c_audit->add_option("--family-dir", knr.family_dir, "Custom family directory");
    c_audit->add_option("--p", knr.p);
    c_audit->add_option("--recipe", knr.recipe)->check(CLI::IsMember({"zero", "constant", "green", "from-fields"}));
    c_audit->add_option("--fields-dir", knr.fields_dir, "Edge fields N.json for from-fields");
    c_audit->add_option("--radii", knr.radii)->delimiter(',');
    c_audit->add_option("--max-growth", knr.th.max_relative_growth);
    c_audit->add_option("--min-divergence", knr.th.min_total_divergence);
    add_emit(*c_audit, cfg);

    CompareArgs cmp;
    std::string cmp_mode;
    auto* c_cmp = app.add_subcommand("compare", "Comparison experiments on exhaustion families");
    c_cmp->require_subcommand(1);
    for (const char* mode : {"scalar", "map", "constancy", "counterexample"}) {
        auto* sub = c_cmp->add_subcommand(mode, std::string(mode) + " experiment");
        sub->add_option("--spec", cmp.spec, "Experiment spec JSON")->required();
        sub->add_option("--p", cmp.p);
        sub->add_option("--radii", cmp.radii)->delimiter(',');
        add_emit(*sub, cfg);
        sub->callback([&cmp_mode, mode] { cmp_mode = mode; });
    }

    CapacityArgs cap;
    auto* c_cap = app.add_subcommand("capacity", "Capacity of the center against the truncation sphere");
    c_cap->add_option("--family", cap.family);
    c_cap->add_option("--family-dir", cap.family_dir);
    c_cap->add_option("--p", cap.p);
    c_cap->add_option("--radii", cap.radii)->delimiter(',');
    add_emit(*c_cap, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_ineq->parsed()) run_ineq(ineq, cfg);
        else if (c_classify->parsed()) run_model(model, cfg);
        else if (c_plap->parsed()) run_plap(plap, cfg);
        else if (c_solve->parsed()) run_solve(problem, cfg);
        else if (c_audit->parsed()) run_knr(knr, cfg);
        else if (c_cmp->parsed()) run_compare(cmp_mode, cmp, cfg);
        else if (c_cap->parsed()) run_capacity(cap, cfg);
    } catch (const ReportedNumericalFailure& e) {
        report_error("numerical", e.what(), cfg, false);
        return 3;
    } catch (const pplap::NumericalError& e) {
        report_error("numerical", e.what(), cfg, true);
        return 3;
    } catch (const pplap::ValidationError& e) {
        report_error("validation", e.what(), cfg, false);
        return 2;
    } catch (const json::exception& e) {
        report_error("validation", e.what(), cfg, false);
        return 2;
    } catch (const std::invalid_argument& e) {
        report_error("validation", e.what(), cfg, false);
        return 2;
    } catch (const fs::filesystem_error& e) {
        report_error("validation", e.what(), cfg, false);
        return 2;
    } catch (const std::out_of_range& e) {
        report_error("validation", e.what(), cfg, false);
        return 2;
    }
    return 0;
}
