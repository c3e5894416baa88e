#include "cxc/cxc.h"

#include "cxc/errors.hpp"
#include "cxc/reports.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct cxc_system {
    cxc::SystemPtr spec;
};

struct cxc_graph {
    cxc::GammaGraph graph;
};

struct cxc_problem {
    cxc::AnnulusProblem problem;
};

namespace {

thread_local std::string last_error;

cxc_status status_of(cxc::ErrorKind k) {
    switch (k) {
    case cxc::ErrorKind::Validation: return CXC_ERR_VALIDATION;
    case cxc::ErrorKind::Budget: return CXC_ERR_BUDGET;
    case cxc::ErrorKind::Convergence: return CXC_ERR_CONVERGENCE;
    case cxc::ErrorKind::NoChain: return CXC_ERR_NO_CHAIN;
    case cxc::ErrorKind::Unsupported: return CXC_ERR_UNSUPPORTED;
    case cxc::ErrorKind::Io: return CXC_ERR_IO;
    case cxc::ErrorKind::Internal: return CXC_ERR_INTERNAL;
    }
    return CXC_ERR_INTERNAL;
}

template <class F>
cxc_status guarded(F&& f) {
    last_error.clear();
    try {
        f();
        return CXC_OK;
    } catch (const cxc::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return CXC_ERR_VALIDATION;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return CXC_ERR_BUDGET;
    } catch (const std::exception& e) {
        last_error = e.what();
        return CXC_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return CXC_ERR_INTERNAL;
    }
}

cxc_status bad_argument(const char* what) {
    last_error = what;
    return CXC_ERR_ARGUMENT;
}

char* copy_out(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void emit(const cxc::Json& j, char** out) { *out = copy_out(cxc::dump_stable(j)); }

std::string text(const char* s) { return s ? std::string(s) : std::string(); }

}  // namespace

extern "C" {

void cxc_string_free(char* s) { std::free(s); }

const char* cxc_last_error(void) { return last_error.c_str(); }

const char* cxc_status_name(cxc_status s) {
    switch (s) {
    case CXC_OK: return "ok";
    case CXC_ERR_VALIDATION: return "validation";
    case CXC_ERR_BUDGET: return "budget";
    case CXC_ERR_CONVERGENCE: return "convergence";
    case CXC_ERR_NO_CHAIN: return "no_chain";
    case CXC_ERR_UNSUPPORTED: return "unsupported";
    case CXC_ERR_IO: return "io";
    case CXC_ERR_INTERNAL: return "internal";
    case CXC_ERR_ARGUMENT: return "argument";
    }
    return "unknown";
}

const char* cxc_version(void) { return "1.0.0"; }

cxc_status cxc_system_load(const char* source, cxc_system** out) {
    if (!source || !out) return bad_argument("cxc_system_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new cxc_system{cxc::load_system(source)}; });
}

void cxc_system_free(cxc_system* s) { delete s; }

cxc_status cxc_system_describe(const cxc_system* s, char** json) {
    if (!s || !json) return bad_argument("cxc_system_describe: null argument");
    return guarded([&] { emit(s->spec->describe(), json); });
}

int cxc_system_degree(const cxc_system* s) { return s ? s->spec->degree : 0; }

cxc_status cxc_system_size_estimate(const cxc_system* s, int depth, uint64_t* out) {
    if (!s || !out) return bad_argument("cxc_system_size_estimate: null argument");
    if (depth < 1) return bad_argument("depth must be >= 1");
    return guarded([&] {
        uint64_t total = 0;
        for (int n = 0; n <= depth; ++n) {
            uint64_t est = n == 0 ? 1 : cxc::level_size_estimate(*s->spec, n);
            total = est > UINT64_MAX - total ? UINT64_MAX : total + est;
        }
        *out = total;
    });
}

cxc_status cxc_graph_build(const cxc_system* s, int depth, uint64_t budget, cxc_graph** out) {
    if (!s || !out) return bad_argument("cxc_graph_build: null argument");
    *out = nullptr;
    return guarded([&] {
        cxc::GammaOptions o;
        o.depth = depth;
        if (budget) o.budget = budget;
        *out = new cxc_graph{cxc::GammaGraph::build(s->spec, o)};
    });
}

void cxc_graph_free(cxc_graph* g) { delete g; }

uint64_t cxc_graph_vertex_count(const cxc_graph* g) { return g ? g->graph.vertex_count() : 0; }
uint64_t cxc_graph_edge_count(const cxc_graph* g) { return g ? g->graph.edge_count() : 0; }
int cxc_graph_depth(const cxc_graph* g) { return g ? g->graph.depth() : -1; }

uint64_t cxc_graph_sphere_size(const cxc_graph* g, int n) {
    if (!g || n < 0 || n > g->graph.depth()) return 0;
    return g->graph.sphere_size(n);
}

cxc_status cxc_graph_export(const cxc_graph* g, const char* format, char** out) {
    if (!g || !out) return bad_argument("cxc_graph_export: null argument");
    std::string f = format ? format : "json";
    if (f != "json" && f != "csv") return bad_argument("format must be json or csv");
    return guarded([&] { *out = copy_out(f == "csv" ? g->graph.to_csv() : cxc::dump_stable(g->graph.to_json())); });
}

cxc_status cxc_graph_report(const cxc_graph* g, const char* format, char** out) {
    if (!g || !out) return bad_argument("cxc_graph_report: null argument");
    std::string f = format ? format : "json";
    if (f != "json" && f != "csv") return bad_argument("format must be json or csv");
    return guarded([&] {
        *out = copy_out(f == "csv" ? cxc::sphere_csv(g->graph) : cxc::dump_stable(cxc::build_report(g->graph)));
    });
}

cxc_status cxc_hyperbolicity(const cxc_graph* g, const char* mode, uint64_t seed, uint64_t samples,
                             uint64_t vertex_cap, char** json) {
    if (!g || !json) return bad_argument("cxc_hyperbolicity: null argument");
    return guarded([&] {
        emit(cxc::hyperbolicity_report(g->graph, mode ? mode : "exhaustive", seed, samples ? samples : 100000,
                                       vertex_cap ? vertex_cap : 1024),
             json);
    });
}

cxc_status cxc_measure(const cxc_graph* g, double epsilon, double tol, char** json) {
    if (!g || !json) return bad_argument("cxc_measure: null argument");
    return guarded([&] { emit(cxc::measure_report(g->graph, epsilon, tol), json); });
}

cxc_status cxc_equidistribute(const cxc_graph* g, const char* xi, int n_lo, int n_hi, int periodic_n,
                              int shadow_level, char** json) {
    if (!g || !json) return bad_argument("cxc_equidistribute: null argument");
    return guarded([&] {
        emit(cxc::equidistribute_report(g->graph, text(xi), n_lo, n_hi, periodic_n, shadow_level), json);
    });
}

cxc_status cxc_axioms(const cxc_graph* g, double epsilon, char** json) {
    if (!g || !json) return bad_argument("cxc_axioms: null argument");
    return guarded([&] { emit(cxc::axioms_report(g->graph, epsilon), json); });
}

cxc_status cxc_problem_load(const char* source, cxc_problem** out) {
    if (!source || !out) return bad_argument("cxc_problem_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new cxc_problem{cxc::load_problem(source)}; });
}

void cxc_problem_free(cxc_problem* p) { delete p; }

size_t cxc_problem_shingle_count(const cxc_problem* p) { return p ? p->problem.shingles.size() : 0; }

cxc_status cxc_modulus(const cxc_problem* p, const char* family, double tol, char** json) {
    if (!p || !json) return bad_argument("cxc_modulus: null argument");
    return guarded([&] { emit(cxc::modulus_report(p->problem, family ? family : "both", tol), json); });
}

cxc_status cxc_conformality_scan(const cxc_system* s, const char* annulus, int base_level, int n1, int n2,
                                 double tol, char** json) {
    if (!s || !json) return bad_argument("cxc_conformality_scan: null argument");
    return guarded([&] { emit(cxc::scan_report(*s->spec, annulus ? annulus : "band", base_level, n1, n2, tol), json); });
}

cxc_status cxc_homnorm(const char* matrix, double epsilon, uint64_t samples, uint64_t seed, const char* group,
                       char** json) {
    if (!matrix || !json) return bad_argument("cxc_homnorm: null argument");
    return guarded([&] {
        cxc::HomnormOptions o;
        o.epsilon = epsilon;
        o.samples = samples;
        o.seed = seed;
        o.group = cxc::parse_group(group ? group : "abelian");
        emit(cxc::homnorm_report(cxc::parse_matrix(matrix), o), json);
    });
}

cxc_status cxc_homnorm_validate(const char* matrix, int* dim) {
    if (!matrix || !dim) return bad_argument("cxc_homnorm_validate: null argument");
    return guarded([&] { *dim = static_cast<int>(cxc::decompose(cxc::parse_matrix(matrix)).phi.rows()); });
}

cxc_status cxc_homnorm_eval(const char* matrix, const double* v, size_t n, double* out) {
    if (!matrix || !v || !out) return bad_argument("cxc_homnorm_eval: null argument");
    return guarded([&] {
        auto norm = cxc::build_norm(cxc::parse_matrix(matrix));
        cxc::require(static_cast<size_t>(norm.dim()) == n, "vector size does not match the matrix");
        *out = norm(Eigen::Map<const Eigen::VectorXd>(v, static_cast<Eigen::Index>(n)));
    });
}

}  // extern "C"
