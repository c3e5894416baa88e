// Command-line front end over the C API.
#include "cxc/cxc.h"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Config {
    std::string system = "builtin:circle:d=2,arcs=4";
    int depth = 6;
    double epsilon = 0.25;
    std::optional<uint64_t> seed;
    std::string out;
    std::string format = "json";
    std::optional<double> tol;
    uint64_t budget = 2000000;
    bool dry_run = false;

    std::string mode = "exhaustive";
    uint64_t samples = 0;
    uint64_t vertex_cap = 1024;

    std::string xi;
    int n_lo = 2;
    int n_hi = -1;
    int periodic = 0;
    int shadow_level = 3;

    std::string problem;
    std::string family = "both";
    std::string annulus;
    int base_level = 2;
    int n1 = 2;
    int n2 = 3;

    std::string matrix;
    std::string group = "abelian";
};

/// Maps a status to the documented exit code.
int exit_code(cxc_status s) {
    switch (s) {
    case CXC_OK: return 0;
    case CXC_ERR_VALIDATION:
    case CXC_ERR_UNSUPPORTED:
    case CXC_ERR_ARGUMENT: return 2;
    case CXC_ERR_BUDGET:
    case CXC_ERR_CONVERGENCE:
    case CXC_ERR_NO_CHAIN: return 3;
    default: return 1;
    }
}

struct Failure {
    int code;
};

void check(cxc_status s, const char* what) {
    if (s == CXC_OK) return;
    std::fprintf(stderr, "cxc: %s failed (%s): %s\n", what, cxc_status_name(s), cxc_last_error());
    throw Failure{exit_code(s)};
}

struct StrDeleter {
    void operator()(char* s) const { cxc_string_free(s); }
};
using Text = std::unique_ptr<char, StrDeleter>;

struct SysDeleter {
    void operator()(cxc_system* s) const { cxc_system_free(s); }
};
struct GraphDeleter {
    void operator()(cxc_graph* g) const { cxc_graph_free(g); }
};
struct ProblemDeleter {
    void operator()(cxc_problem* p) const { cxc_problem_free(p); }
};

void write_output(const Config& c, const std::string& body) {
    std::string text = body;
    if (text.empty() || text.back() != '\n') text += '\n';
    if (c.out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "cxc: cannot open '%s' for writing\n", c.out.c_str());
        throw Failure{1};
    }
    f << text;
    f.close();
    if (!f) {
        std::fprintf(stderr, "cxc: write to '%s' failed\n", c.out.c_str());
        throw Failure{1};
    }
}

std::string json_string(const std::string& s) {
    std::string o = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') o += '\\';
        o += ch;
    }
    return o + "\"";
}

void dry_run_ok(const Config& c, const std::string& command, const std::string& detail) {
    write_output(c, "{\n  \"schema\": \"v1\",\n  \"kind\": \"dry_run\",\n  \"command\": " + json_string(command) +
                        ",\n  \"valid\": true" + detail + "\n}");
}

std::unique_ptr<cxc_system, SysDeleter> load(const Config& c) {
    cxc_system* s = nullptr;
    check(cxc_system_load(c.system.c_str(), &s), "loading the system");
    return std::unique_ptr<cxc_system, SysDeleter>(s);
}

void require_format(const Config& c, bool csv_ok) {
    if (c.format == "json" || (csv_ok && c.format == "csv")) return;
    std::fprintf(stderr, "cxc: --format %s is not available for this command\n", c.format.c_str());
    throw Failure{2};
}

/// Loads the system and builds the graph, or stops after validation on --dry-run.
std::unique_ptr<cxc_graph, GraphDeleter> graph(const Config& c, const std::string& command) {
    if (c.depth < 1) {
        std::fprintf(stderr, "cxc: --depth must be >= 1\n");
        throw Failure{2};
    }
    auto s = load(c);
    uint64_t est = 0;
    check(cxc_system_size_estimate(s.get(), c.depth, &est), "estimating the graph size");
    if (c.dry_run) {
        if (est > c.budget) {
            std::fprintf(stderr, "cxc: depth %d may need %llu vertices, over the budget of %llu\n", c.depth,
                         static_cast<unsigned long long>(est), static_cast<unsigned long long>(c.budget));
            throw Failure{3};
        }
        dry_run_ok(c, command, ",\n  \"estimated_vertices\": " + std::to_string(est));
        return nullptr;
    }
    cxc_graph* g = nullptr;
    check(cxc_graph_build(s.get(), c.depth, c.budget, &g), "building the graph");
    return std::unique_ptr<cxc_graph, GraphDeleter>(g);
}

void require_epsilon(const Config& c) {
    if (!(c.epsilon > 0)) {
        std::fprintf(stderr, "cxc: --epsilon must be positive\n");
        throw Failure{2};
    }
}

int run_build(const Config& c) {
    require_format(c, true);
    auto g = graph(c, "build");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_graph_report(g.get(), c.format.c_str(), &out), "build report");
    write_output(c, Text(out).get());
    return 0;
}

int run_export(const Config& c) {
    require_format(c, true);
    auto g = graph(c, "export-graph");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_graph_export(g.get(), c.format.c_str(), &out), "graph export");
    write_output(c, Text(out).get());
    return 0;
}

int run_hyperbolicity(const Config& c) {
    require_format(c, false);
    if (c.mode != "exhaustive" && c.mode != "sampled") {
        std::fprintf(stderr, "cxc: --mode must be exhaustive or sampled\n");
        return 2;
    }
    if (c.mode == "sampled" && !c.seed) {
        std::fprintf(stderr, "cxc: --seed is required with --mode sampled\n");
        return 2;
    }
    auto g = graph(c, "hyperbolicity");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_hyperbolicity(g.get(), c.mode.c_str(), c.seed.value_or(0), c.samples, c.vertex_cap, &out),
          "hyperbolicity");
    write_output(c, Text(out).get());
    return 0;
}

int run_measure(const Config& c) {
    require_format(c, false);
    require_epsilon(c);
    auto g = graph(c, "measure");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_measure(g.get(), c.epsilon, c.tol.value_or(0.05), &out), "measure");
    write_output(c, Text(out).get());
    return 0;
}

int run_equidistribute(const Config& c) {
    require_format(c, false);
    auto g = graph(c, "equidistribute");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_equidistribute(g.get(), c.xi.empty() ? nullptr : c.xi.c_str(), c.n_lo, c.n_hi, c.periodic,
                             c.shadow_level, &out),
          "equidistribution");
    write_output(c, Text(out).get());
    return 0;
}

int run_axioms(const Config& c) {
    require_format(c, false);
    require_epsilon(c);
    auto g = graph(c, "axioms");
    if (!g) return 0;
    char* out = nullptr;
    check(cxc_axioms(g.get(), c.epsilon, &out), "axiom check");
    write_output(c, Text(out).get());
    return 0;
}

int run_modulus(const Config& c) {
    require_format(c, false);
    double tol = c.tol.value_or(1e-6);
    if (!(tol > 0)) {
        std::fprintf(stderr, "cxc: --tol must be positive\n");
        return 2;
    }
    if (!c.annulus.empty()) {
        auto s = load(c);
        if (c.dry_run) {
            dry_run_ok(c, "modulus", "");
            return 0;
        }
        char* out = nullptr;
        check(cxc_conformality_scan(s.get(), c.annulus.c_str(), c.base_level, c.n1, c.n2, tol, &out),
              "conformality scan");
        write_output(c, Text(out).get());
        return 0;
    }
    if (c.problem.empty()) {
        std::fprintf(stderr, "cxc: modulus needs --problem (or --annulus with an fsr --system)\n");
        return 2;
    }
    if (c.family != "t" && c.family != "s" && c.family != "both") {
        std::fprintf(stderr, "cxc: --family must be t, s or both\n");
        return 2;
    }
    cxc_problem* raw = nullptr;
    check(cxc_problem_load(c.problem.c_str(), &raw), "loading the problem");
    std::unique_ptr<cxc_problem, ProblemDeleter> p(raw);
    if (c.dry_run) {
        dry_run_ok(c, "modulus", ",\n  \"shingles\": " + std::to_string(cxc_problem_shingle_count(p.get())));
        return 0;
    }
    char* out = nullptr;
    check(cxc_modulus(p.get(), c.family.c_str(), tol, &out), "modulus");
    write_output(c, Text(out).get());
    return 0;
}

int run_homnorm(const Config& c) {
    require_format(c, false);
    require_epsilon(c);
    if (c.matrix.empty()) {
        std::fprintf(stderr, "cxc: homnorm needs --matrix\n");
        return 2;
    }
    int dim = 0;
    check(cxc_homnorm_validate(c.matrix.c_str(), &dim), "matrix validation");
    if (c.dry_run) {
        dry_run_ok(c, "homnorm", ",\n  \"dimension\": " + std::to_string(dim));
        return 0;
    }
    char* out = nullptr;
    check(cxc_homnorm(c.matrix.c_str(), c.epsilon, c.samples ? c.samples : 10000, c.seed.value_or(7), c.group.c_str(),
                      &out),
          "homnorm");
    write_output(c, Text(out).get());
    return 0;
}

void common(CLI::App* sub, Config& c, bool graphy) {
    sub->add_option("--out", c.out, "Output path (stdout when omitted)");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--dry-run", c.dry_run, "Validate inputs without computing");
    sub->add_option("--seed", c.seed, "Seed for sampled modes");
    sub->add_option("--tol", c.tol, "Tolerance");
    if (graphy) {
        sub->add_option("--system", c.system, "Builtin descriptor or JSON spec path");
        sub->add_option("--depth", c.depth, "Graph depth (>= 1)");
        sub->add_option("--epsilon", c.epsilon, "Visual parameter");
        sub->add_option("--budget-vertices", c.budget, "Vertex budget");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expanding branched coverings: hyperbolic graphs, measures, moduli and norms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cxc_version());
    Config c;

    auto* build = app.add_subcommand("build", "Build the graph and report sphere sizes and checks");
    common(build, c, true);
    auto* hyp = app.add_subcommand("hyperbolicity", "Gromov hyperbolicity constant");
    common(hyp, c, true);
    hyp->add_option("--mode", c.mode, "exhaustive or sampled");
    hyp->add_option("--samples", c.samples, "Sampled triples");
    hyp->add_option("--vertex-cap", c.vertex_cap, "Vertex cap for the exhaustive scan");
    auto* meas = app.add_subcommand("measure", "Poincare series, shadow lemma and entropy");
    common(meas, c, true);
    auto* equi = app.add_subcommand("equidistribute", "Preimage and periodic equidistribution");
    common(equi, c, true);
    equi->add_option("--xi", c.xi, "Base vertex label (default: first vertex of S(1))");
    equi->add_option("--n-lo", c.n_lo, "First preimage level");
    equi->add_option("--n-hi", c.n_hi, "Last preimage level (default: to the depth)");
    equi->add_option("--periodic", c.periodic, "Period of the periodic measure (0 skips)");
    equi->add_option("--shadow-level", c.shadow_level, "Level of the test shadows");
    auto* ax = app.add_subcommand("axioms", "cxc axiom verdicts and metric regularity probes");
    common(ax, c, true);
    auto* mod = app.add_subcommand("modulus", "Combinatorial moduli of an annulus");
    common(mod, c, false);
    mod->add_option("--problem", c.problem, "Annulus JSON path or builtin:<name>");
    mod->add_option("--family", c.family, "t, s or both");
    mod->add_option("--system", c.system, "fsr system for --annulus scans");
    mod->add_option("--annulus", c.annulus, "Scan a fixed annulus: band or vertex");
    mod->add_option("--base-level", c.base_level, "Base level of the vertex ring");
    mod->add_option("--n1", c.n1, "First scan level");
    mod->add_option("--n2", c.n2, "Last scan level");
    auto* hn = app.add_subcommand("homnorm", "Homogeneous norm of an expanding matrix");
    common(hn, c, false);
    hn->add_option("--matrix", c.matrix, "Rows separated by ';', entries by ','");
    hn->add_option("--epsilon", c.epsilon, "Snowflake exponent");
    hn->add_option("--samples", c.samples, "Samples for the homothety checks");
    hn->add_option("--group", c.group, "abelian or heisenberg");
    auto* exp = app.add_subcommand("export-graph", "Export the full graph");
    common(exp, c, true);

    hn->preparse_callback([&](size_t) { c.epsilon = 0.3; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::pair<CLI::App*, std::function<int(const Config&)>> table[] = {
        {build, run_build},       {hyp, run_hyperbolicity}, {meas, run_measure}, {equi, run_equidistribute},
        {ax, run_axioms},         {mod, run_modulus},       {hn, run_homnorm},   {exp, run_export},
    };
    try {
        for (const auto& [sub, fn] : table)
            if (sub->parsed()) return fn(c);
    } catch (const Failure& f) {
        return f.code;
    }
    return 2;
}
