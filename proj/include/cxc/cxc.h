#ifndef CXC_H
#define CXC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CXC_API __declspec(dllexport)
#else
#define CXC_API __attribute__((visibility("default")))
#endif

typedef enum cxc_status {
    CXC_OK = 0,
    CXC_ERR_VALIDATION = 1,
    CXC_ERR_BUDGET = 2,
    CXC_ERR_CONVERGENCE = 3,
    CXC_ERR_NO_CHAIN = 4,
    CXC_ERR_UNSUPPORTED = 5,
    CXC_ERR_IO = 6,
    CXC_ERR_INTERNAL = 7,
    CXC_ERR_ARGUMENT = 8
} cxc_status;

typedef struct cxc_system cxc_system;
typedef struct cxc_graph cxc_graph;
typedef struct cxc_problem cxc_problem;

/* Strings returned through char** belong to the caller; release with cxc_string_free. */
CXC_API void cxc_string_free(char* s);
/* Message of the last failing call on this thread ("" if none). */
CXC_API const char* cxc_last_error(void);
CXC_API const char* cxc_status_name(cxc_status s);
CXC_API const char* cxc_version(void);

/* Builtin descriptor ("builtin:circle:d=2,arcs=4", "barycentric", ...) or JSON path. */
CXC_API cxc_status cxc_system_load(const char* source, cxc_system** out);
CXC_API void cxc_system_free(cxc_system* s);
CXC_API cxc_status cxc_system_describe(const cxc_system* s, char** json);
CXC_API int cxc_system_degree(const cxc_system* s);
/* Vertex count estimate for a graph of the given depth (no construction). */
CXC_API cxc_status cxc_system_size_estimate(const cxc_system* s, int depth, uint64_t* out);

/* budget caps the vertex count; 0 selects the default (2e6). */
CXC_API cxc_status cxc_graph_build(const cxc_system* s, int depth, uint64_t budget, cxc_graph** out);
CXC_API void cxc_graph_free(cxc_graph* g);
CXC_API uint64_t cxc_graph_vertex_count(const cxc_graph* g);
CXC_API uint64_t cxc_graph_edge_count(const cxc_graph* g);
CXC_API int cxc_graph_depth(const cxc_graph* g);
CXC_API uint64_t cxc_graph_sphere_size(const cxc_graph* g, int n);
/* format: "json" or "csv" (full vertex table). */
CXC_API cxc_status cxc_graph_export(const cxc_graph* g, const char* format, char** out);
/* Build summary; format "json" or "csv" (n,size series). */
CXC_API cxc_status cxc_graph_report(const cxc_graph* g, const char* format, char** out);

/* mode: "exhaustive" or "sampled"; vertex_cap 0 selects the default. */
CXC_API cxc_status cxc_hyperbolicity(const cxc_graph* g, const char* mode, uint64_t seed, uint64_t samples,
                                     uint64_t vertex_cap, char** json);
CXC_API cxc_status cxc_measure(const cxc_graph* g, double epsilon, double tol, char** json);
/* xi: vertex label or NULL; n_hi < 0 runs to the graph depth; periodic_n 0 skips. */
CXC_API cxc_status cxc_equidistribute(const cxc_graph* g, const char* xi, int n_lo, int n_hi, int periodic_n,
                                      int shadow_level, char** json);
CXC_API cxc_status cxc_axioms(const cxc_graph* g, double epsilon, char** json);

/* "builtin:path:5", "builtin:ring:2x4", ... or a JSON path. */
CXC_API cxc_status cxc_problem_load(const char* source, cxc_problem** out);
CXC_API void cxc_problem_free(cxc_problem* p);
CXC_API size_t cxc_problem_shingle_count(const cxc_problem* p);
/* family: "t", "s" or "both". */
CXC_API cxc_status cxc_modulus(const cxc_problem* p, const char* family, double tol, char** json);
/* annulus: "band" or "vertex". */
CXC_API cxc_status cxc_conformality_scan(const cxc_system* s, const char* annulus, int base_level, int n1, int n2,
                                         double tol, char** json);

/* matrix "3,0;0,4"; group "abelian" or "heisenberg". */
CXC_API cxc_status cxc_homnorm(const char* matrix, double epsilon, uint64_t samples, uint64_t seed,
                               const char* group, char** json);
/* Parses and checks the matrix (expanding, decomposable); writes its size. */
CXC_API cxc_status cxc_homnorm_validate(const char* matrix, int* dim);
/* |v| for the homogeneous norm of the matrix (power 1); n must match its size. */
CXC_API cxc_status cxc_homnorm_eval(const char* matrix, const double* v, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
