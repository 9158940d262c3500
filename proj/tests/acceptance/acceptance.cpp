// Acceptance suite: one PASS/FAIL line per check, grouped by criterion.
//
//   acceptance            run every criterion
//   acceptance --only K   run criterion K (1..10)
//
// Exit status is 0 when every executed check passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pplap/io.hpp"
#include "pplap/pplap.hpp"

namespace fs = std::filesystem;
using pplap::EdgeField;
using pplap::ExhaustionFamily;
using pplap::NodeField;
using pplap::PExponent;
using pplap::WeightedGraph;

namespace {

int failures = 0;

void check(const std::string& id, bool ok, const std::string& detail)
{
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << "  " << detail << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra, std::vector<std::uint8_t> boundary = {})
{
    std::uniform_real_distribution<double> pos(0.1, 10.0);
    std::vector<double> mu(n);
    for (double& m : mu) m = pos(rng);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<pplap::Edge> edges;
    auto add = [&](std::size_t a, std::size_t b) {
        if (a == b || !seen.insert({std::min(a, b), std::max(a, b)}).second) return;
        if (rng() & 1) std::swap(a, b);
        edges.push_back({a, b, pos(rng)});
    };
    for (std::size_t a = 1; a < n; ++a) add(a, std::uniform_int_distribution<std::size_t>(0, a - 1)(rng));
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    for (std::size_t k = 0; k < extra; ++k) add(any(rng), any(rng));
    return WeightedGraph(std::move(mu), std::move(edges), std::move(boundary));
}

NodeField random_field(std::mt19937_64& rng, std::size_t n, std::size_t dim, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    NodeField u(n, dim);
    for (double& v : u.data()) v = normal(rng);
    return u;
}

pplap::ExperimentSpec load_spec(const std::string& name)
{
    const fs::path path = fs::path(PPLAP_DATA_DIR) / name;
    return pplap::io::experiment_from_json(pplap::io::read_json(path), path.parent_path());
}

// ---------------------------------------------------------------------------

void criterion_1()
{
    const std::vector<double> ps{2.0, 2.5, 3.0, 4.0, 6.0, 10.0};
    const std::size_t samples = 1000000;
    const std::uint64_t seed = 20240601;
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = pplap::sample_inequalities(ps, 1, 8, samples, seed);
    const double elapsed = seconds_since(t0);

    check("1a lindqvist", s.min_lindqvist_relative >= -1e-10, "min relative gap " + fmt(s.min_lindqvist_relative));
    check("1b mhck", s.min_mhck_relative >= -1e-10, "min relative gap " + fmt(s.min_mhck_relative));
    check("1c p=2 identity", s.max_p2_relative <= 1e-12, "max |gap| " + fmt(s.max_p2_relative));

    // Replay the same stream: classical gap >= 0 everywhere, strictly positive
    // once |x - y| >= 1e-6 (relative to the input magnitude).
    pplap::SampleStream stream(seed);
    std::vector<double> x, y;
    std::size_t negative = 0, zero_off_diagonal = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t d = 1 + (i / ps.size()) % 8;
        x.resize(d);
        y.resize(d);
        pplap::detail::draw_pair(stream, x, y);
        const double g = pplap::classical_mhck_gap_closed_form(x, y);
        const double mag = std::max({1.0, pplap::detail::norm(x), pplap::detail::norm(y)});
        if (g < 0.0) ++negative;
        if (pplap::detail::distance(x, y) >= 1e-6 * mag && !(g > 0.0)) ++zero_off_diagonal;
    }
    check("1d classical", negative == 0 && zero_off_diagonal == 0,
          std::to_string(negative) + " negative, " + std::to_string(zero_off_diagonal) +
              " zero gaps with x != y");
    check("1e runtime", elapsed < 30.0, fmt(elapsed) + " s for " + std::to_string(samples) + " samples");
}

void criterion_2()
{
    bool threshold_ok = true;
    std::string wrong;
    double worst = 0.0;
    for (int m = 2; m <= 6; ++m) {
        for (double p : {2.0, 2.5, 3.0, 4.0, 6.0}) {
            const auto v = pplap::classify_model(pplap::ModelProfile::power(1.0), m, PExponent(p));
            const bool parabolic = v.verdict == pplap::ParabolicityClass::Parabolic;
            if (parabolic != (m <= p)) {
                threshold_ok = false;
                wrong += " (m=" + std::to_string(m) + ",p=" + fmt(p) + ")";
            }
            // integral_1^R (omega r^(m-1))^(-1/(p-1)) dr in closed form
            const double omega = 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
            const double e = -(m - 1.0) / (p - 1.0);
            const double c = std::pow(omega, -1.0 / (p - 1.0));
            for (double R : {10.0, 1e3, 1e6}) {
                const double exact = c * (std::abs(e + 1.0) < 1e-15 ? std::log(R) : (std::pow(R, e + 1.0) - 1.0) / (e + 1.0));
                const double got = pplap::parabolicity_integral(pplap::ModelProfile::power(1.0), m, PExponent(p), 1.0, R);
                worst = std::max(worst, std::abs(got - exact) / std::abs(exact));
            }
        }
    }
    check("2a threshold", threshold_ok, threshold_ok ? "Parabolic iff m <= p on 25 cases" : "mismatch at" + wrong);
    check("2b quadrature", worst <= 1e-8, "max relative error " + fmt(worst));
}

void criterion_3()
{
    std::mt19937_64 rng(3);
    double sbp = 0.0;
    double duality = 0.0;
    double fd = 0.0;
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
        const WeightedGraph g = random_graph(rng, n, n / 2);
        const std::size_t dim = 1 + k % 3;
        const PExponent p(std::uniform_real_distribution<double>(2.0, 6.0)(rng));

        // <dphi, X>_w = -<phi, div X>_mu
        const NodeField phi = random_field(rng, n, dim);
        EdgeField x(g.num_edges(), dim);
        std::normal_distribution<double> normal;
        for (double& v : x.data()) v = normal(rng);
        sbp = std::max(sbp, pplap::summation_by_parts_residual(g, phi, x) / pplap::summation_by_parts_scale(g, phi, x));

        // <Lap_p u, phi>_mu = -sum_e w <|du|^(p-2) du, dphi>
        const NodeField u = random_field(rng, n, dim);
        const double lhs = pplap::node_pairing(g, pplap::p_laplacian(g, u, p), phi);
        const EdgeField flux = pplap::p_flux(g, u, p);
        const EdgeField dphi = pplap::edge_gradient(g, phi);
        const double rhs = -pplap::edge_pairing(g, flux, dphi);
        double scale = 0.0;
        for (pplap::EdgeIndex e = 0; e < g.num_edges(); ++e) {
            for (std::size_t c = 0; c < dim; ++c) scale += g.edge(e).weight * std::abs(flux.at(e, c) * dphi.at(e, c));
        }
        duality = std::max(duality, std::abs(lhs - rhs) / std::max(scale, 1e-300));

        // dE_p/du(a) = -mu_a Lap_p u(a), central differences
        if (k % 5 == 0) {
            const NodeField lap = pplap::p_laplacian(g, u, p);
            for (std::size_t a = 0; a < std::min<std::size_t>(n, 10); ++a) {
                for (std::size_t c = 0; c < dim; ++c) {
                    const double h = 1e-6;
                    NodeField up = u, um = u;
                    up.at(a, c) += h;
                    um.at(a, c) -= h;
                    const double num = (pplap::p_energy(g, up, p) - pplap::p_energy(g, um, p)) / (2.0 * h);
                    const double ana = -g.measure(a) * lap.at(a, c);
                    fd = std::max(fd, std::abs(num - ana) / std::max(1.0, std::abs(ana)));
                }
            }
        }
    }
    check("3a summation by parts", sbp <= 1e-10, "max relative residual " + fmt(sbp) + " on 50 graphs");
    check("3b duality", duality <= 1e-10, "max relative residual " + fmt(duality));
    check("3c energy gradient", fd <= 1e-6, "max relative finite-difference error " + fmt(fd));
}

void criterion_4()
{
    std::mt19937_64 rng(4);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
        const WeightedGraph g = random_graph(rng, n, n);
        const std::size_t dim = 1 + k % 4;
        const PExponent p(std::uniform_real_distribution<double>(2.0, 10.0)(rng));
        const NodeField u = random_field(rng, n, dim);
        NodeField v = random_field(rng, n, dim);
        if (k % 7 == 0) v = u + random_field(rng, n, dim, 1e-4);
        const auto cs = pplap::coercivity_sums(g, u, v, p);
        if (cs.scale == 0.0) continue;
        worst = std::min(worst, (cs.pairing - cs.bound) / cs.scale);
    }
    check("4 coercivity", worst >= -1e-10, "min relative (pairing - bound) " + fmt(worst) + " over 1e4 pairs");
}

Eigen::VectorXd dense_solution(const WeightedGraph& g, const NodeField& f, const std::map<std::size_t, double>& fixed)
{
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (const auto& e : g.edges()) {
        const auto t = static_cast<Eigen::Index>(e.tail);
        const auto h = static_cast<Eigen::Index>(e.head);
        A(t, t) -= e.weight;
        A(t, h) += e.weight;
        A(h, h) -= e.weight;
        A(h, t) += e.weight;
    }
    for (Eigen::Index a = 0; a < n; ++a) b[a] = g.measure(static_cast<std::size_t>(a)) * f.at(static_cast<std::size_t>(a));
    for (const auto& [a, val] : fixed) {
        const auto i = static_cast<Eigen::Index>(a);
        A.row(i).setZero();
        A(i, i) = 1.0;
        b[i] = val;
    }
    return A.fullPivLu().solve(b);
}

WeightedGraph unit_path(std::size_t n, std::vector<double> w = {})
{
    std::vector<pplap::Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w.empty() ? 1.0 : w[i]});
    std::vector<std::uint8_t> b(n, 0);
    b.front() = b.back() = 1;
    return WeightedGraph(std::vector<double>(n, 1.0), std::move(edges), std::move(b));
}

void criterion_5()
{
    bool residual_ok = true;
    std::mt19937_64 rng(5);
    double linear = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(5, 80)(rng);
        std::vector<std::uint8_t> boundary(n, 0);
        boundary[0] = boundary[n / 2] = 1;
        pplap::ProblemSpec s;
        s.graph = random_graph(rng, n, n, boundary);
        s.p = PExponent(2.0);
        s.source = random_field(rng, n, 1);
        s.dirichlet[0] = {1.0};
        s.dirichlet[n / 2] = {-2.0};
        const auto r = pplap::solve(s);
        residual_ok = residual_ok && r.converged && r.residual <= r.tolerance;
        const Eigen::VectorXd want = dense_solution(s.graph, s.source, {{0, 1.0}, {n / 2, -2.0}});
        for (std::size_t a = 0; a < n; ++a) linear = std::max(linear, std::abs(r.solution.at(a) - want[static_cast<Eigen::Index>(a)]));
    }
    check("5a p=2 linear oracle", linear <= 1e-8, "max |u - u_dense| " + fmt(linear) + " on 20 graphs");

    auto path_solve = [&](WeightedGraph g, double p) {
        pplap::ProblemSpec s;
        const std::size_t n = g.num_nodes();
        s.graph = std::move(g);
        s.p = PExponent(p);
        s.dirichlet[0] = {0.0};
        s.dirichlet[n - 1] = {1.0};
        const auto r = pplap::solve(s);
        residual_ok = residual_ok && r.converged && r.residual <= r.tolerance;
        return r.solution;
    };
    double err = 0.0;
    for (double p : {2.0, 2.5, 3.0, 4.0, 6.0, 10.0}) {
        err = std::max(err, std::abs(path_solve(unit_path(3), p).at(1) - 0.5));
        const NodeField u = path_solve(unit_path(4), p);
        for (std::size_t a = 0; a < 4; ++a) err = std::max(err, std::abs(u.at(a) - a / 3.0));
    }
    err = std::max(err, std::abs(path_solve(unit_path(3, {1.0, 3.0}), 2.0).at(1) - 0.75));
    check("5b path examples", err <= 1e-10, "max error " + fmt(err));
    check("5c residual", residual_ok, "every run converged with residual below its tolerance");
}

void criterion_6()
{
    double worst = 0.0;
    for (double p : {2.0, 3.0, 4.0}) {
        for (int N : {4, 8, 16, 32, 64}) {
            const double c = pplap::capacity(ExhaustionFamily::path(), PExponent(p), N);
            worst = std::max(worst, std::abs(c * std::pow(N, p - 1.0) - 1.0));
        }
    }
    check("6 path capacity", worst <= 1e-9, "max |cap N^(p-1) - 1| " + fmt(worst));
}

void criterion_7()
{
    const auto t0 = std::chrono::steady_clock::now();
    const PExponent p2(2.0);
    auto zero = [](const pplap::Truncation& t) { return EdgeField(t.graph.num_edges(), 1); };
    auto constant = [](const pplap::Truncation& t) { return EdgeField(t.graph.num_edges(), 1, 1.0); };
    auto green = [&](const pplap::Truncation& t) { return pplap::green_flux_field(t, p2); };

    bool zero_ok = true;
    for (const auto& fam : {ExhaustionFamily::path(), ExhaustionFamily::lattice(2), ExhaustionFamily::lattice(3)}) {
        zero_ok = zero_ok && pplap::knr_audit(fam, {4, 6, 8}, zero, p2).verdict == pplap::KnrVerdict::FailsC;
    }
    check("7a zero field", zero_ok, "FailsC on path, Z2, Z3");

    bool const_ok = true;
    for (const auto& fam : {ExhaustionFamily::path(), ExhaustionFamily::line()}) {
        for (double p : {2.0, 3.0}) {
            const_ok = const_ok &&
                       pplap::knr_audit(fam, {8, 16, 32}, constant, PExponent(p)).verdict == pplap::KnrVerdict::FailsA;
        }
    }
    check("7b constant field", const_ok, "FailsA on path and line");

    const auto rep = pplap::knr_audit(ExhaustionFamily::lattice(3), {6, 10, 14}, green, p2);
    std::string detail = std::string(pplap::to_string(rep.verdict)) + ", norm growth " + fmt(rep.norm_growth) +
                         ", total divergence";
    for (const auto& r : rep.rows) detail += " " + fmt(r.total_divergence);
    check("7c Z3 Green field", rep.verdict == pplap::KnrVerdict::WitnessNonParabolic, detail);
    const double elapsed = seconds_since(t0);
    check("7d runtime", elapsed < 120.0, fmt(elapsed) + " s");
}

void criterion_8()
{
    for (const char* name : {"scalar_path.json", "scalar_z2.json", "map_path.json", "map_z2.json"}) {
        const auto rep = pplap::run_experiment(load_spec(name));
        double max_osc = 0.0;
        std::size_t levels = 0;
        bool levels_ok = true;
        for (const auto& r : rep.rows) {
            max_osc = std::max(max_osc, r.osc);
            for (const auto& l : r.levels) {
                ++levels;
                levels_ok = levels_ok && l.audit.norm_ok && l.audit.negative_mass_ok;
            }
        }
        const bool map = rep.mode == pplap::ExperimentMode::Map;
        const bool ok = max_osc <= 1e-6 && rep.conclusion == pplap::TrendConclusion::OscillationVanishing && rep.checks_ok &&
                        levels_ok && (!map || levels > 0);
        std::string detail = std::string(to_string(rep.mode)) + " on " + rep.family + ": max osc " + fmt(max_osc) +
                             ", " + to_string(rep.conclusion) + ", checks " + (rep.checks_ok ? "ok" : "failed");
        if (map) detail += ", " + std::to_string(levels) + " X_T levels " + (levels_ok ? "within bounds" : "violated");
        check(std::string("8 ") + name, ok, detail);
    }
}

void criterion_9()
{
    const auto z3 = pplap::run_experiment(load_spec("counterexample_z3.json"));
    check("9a Z3 counterexample", z3.conclusion == pplap::TrendConclusion::OscillationPersistent && z3.rows.back().osc > 1e-3,
          std::string(to_string(z3.conclusion)) + ", final osc " + fmt(z3.rows.back().osc));
    const auto path = pplap::run_experiment(load_spec("counterexample_path.json"));
    check("9b path counterexample", path.conclusion == pplap::TrendConclusion::OscillationVanishing,
          std::string(to_string(path.conclusion)) + ", final osc " + fmt(path.rows.back().osc));
}

int run_cli(const std::string& args, const fs::path& out)
{
    const std::string cmd = std::string(PPLAP_CLI_PATH) + " " + args + " --emit json,csv,svg --out " + out.string() +
                            " > " + (out / ("stdout_" + std::to_string(std::hash<std::string>{}(args)) + ".txt")).string() +
                            " 2>/dev/null";
    return std::system(cmd.c_str());
}

void criterion_10()
{
    const std::string data = PPLAP_DATA_DIR;
    const std::vector<std::string> runs{
        "ineq --samples 200000 --seed 11",
        "model classify --profile power:1 --m 3 --p 2",
        "solve --problem " + data + "/path3_problem.json",
        "knr audit --family lattice3 --p 2 --recipe green --radii 6,10,14",
        "capacity --family path --p 3 --radii 4,8,16,32,64",
        "compare scalar --spec " + data + "/scalar_z2.json",
        "compare map --spec " + data + "/map_z2.json",
        "compare constancy --spec " + data + "/constancy_path.json",
        "compare counterexample --spec " + data + "/counterexample_z3.json",
    };
    const fs::path root = fs::temp_directory_path() / "pplap_acceptance_repro";
    fs::remove_all(root);
    bool all_ran = true;
    for (const char* sub : {"a", "b"}) {
        fs::create_directories(root / sub);
        for (const auto& r : runs) all_ran = all_ran && run_cli(r, root / sub) == 0;
    }
    std::size_t files = 0;
    std::vector<std::string> differ;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        const auto name = entry.path().filename();
        ++files;
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        if (!fs::exists(root / "b" / name) || slurp(entry.path()) != slurp(root / "b" / name)) differ.push_back(name.string());
    }
    std::string detail = std::to_string(files) + " files compared";
    for (const auto& d : differ) detail += ", differs: " + d;
    check("10 reproducibility", all_ran && differ.empty() && files > runs.size(),
          (all_ran ? "" : "a CLI run failed; ") + detail);
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::cerr << "criterion must be 1.." << criteria.size() << "\n";
        return 2;
    }
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (only != 0 && static_cast<int>(k) + 1 != only) continue;
        try {
            criteria[k]();
        } catch (const std::exception& e) {
            check(std::to_string(k + 1) + " (exception)", false, e.what());
        }
    }
    std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
