#include "cxc/reports.hpp"

#include "cxc/cxccheck.hpp"
#include "cxc/errors.hpp"
#include "cxc/hypmetric.hpp"
#include "cxc/measure.hpp"

#include <cmath>
#include <sstream>

namespace cxc {

namespace {

Json header(const char* kind, const GammaGraph& g) {
    Json j;
    j["schema"] = "v1";
    j["kind"] = kind;
    j["system"] = g.spec().descriptor;
    j["depth"] = g.depth();
    return j;
}

Json sphere_sizes(const GammaGraph& g) {
    Json a = Json::array();
    for (int n = 0; n <= g.depth(); ++n) a.push_back(g.sphere_size(n));
    return a;
}

MetricParams params(double epsilon) {
    require(epsilon > 0 && std::isfinite(epsilon), "epsilon must be positive");
    MetricParams p;
    p.epsilon = epsilon;
    return p;
}

}  // namespace

Json build_report(const GammaGraph& g) {
    Json j = header("build", g);
    j["description"] = g.spec().describe();
    j["vertices"] = g.vertex_count();
    j["edges"] = g.edge_count();
    j["sphere_sizes"] = sphere_sizes(g);
    j["checks"] = verify_graph(g).to_json();
    return j;
}

std::string sphere_csv(const GammaGraph& g) {
    std::ostringstream os;
    os << "n,size\n";
    for (int n = 0; n <= g.depth(); ++n) os << n << "," << g.sphere_size(n) << "\n";
    return os.str();
}

Json hyperbolicity_report(const GammaGraph& g, const std::string& mode, uint64_t seed, uint64_t samples,
                          uint64_t vertex_cap) {
    DeltaMode m;
    if (mode == "exhaustive") m = DeltaMode::Exhaustive;
    else if (mode == "sampled") m = DeltaMode::Sampled;
    else fail(ErrorKind::Validation, "mode must be exhaustive or sampled, got '" + mode + "'");
    Json j = header("hyperbolicity", g);
    j["vertices"] = g.vertex_count();
    j["result"] = hyperbolicity_delta(g, m, seed, samples, vertex_cap).to_json(g);
    return j;
}

Json measure_report(const GammaGraph& g, double epsilon, double tol) {
    auto p = params(epsilon);
    require(tol > 0, "tol must be positive");
    const int d = g.spec().degree;
    Json j = header("measure", g);
    j["epsilon"] = epsilon;
    j["alpha"] = std::log(static_cast<double>(d)) / epsilon;
    Json ps = Json::array();
    for (double ds : {0.1, 0.5, 1.0}) {
        double s = std::log(static_cast<double>(d)) + ds;
        auto r = poincare_series(g, s);
        auto mu = mu_s(g, s);
        ps.push_back({{"s", s},
                      {"closed_form", r.closed},
                      {"truncated", r.truncated},
                      {"terms", r.terms},
                      {"difference", r.difference},
                      {"mu_s_total", mu.total()},
                      {"mu_s_tail", mu.tail}});
    }
    j["poincare"] = ps;
    j["pushforward_exact"] = check_pushforward(g);
    j["shadow_lemma"] = shadow_lemma_ratios(g, p, g.depth()).to_json();
    j["entropy"] = entropy_report(g, p, tol).to_json();
    return j;
}

Json equidistribute_report(const GammaGraph& g, const std::string& xi, int n_lo, int n_hi, int periodic_n,
                           int shadow_level) {
    require(g.depth() >= 2, "equidistribution needs depth >= 2");
    uint32_t v = g.level_begin(1);
    if (!xi.empty()) {
        bool found = false;
        for (uint32_t u = 1; u < g.vertex_count() && !found; ++u)
            if (g.label(u) == xi) {
                v = u;
                found = true;
            }
        require(found, "unknown vertex label '" + xi + "'");
    }
    if (n_hi < 0) n_hi = g.depth() - static_cast<int>(g.level(v));
    require(n_lo >= 0 && n_lo <= n_hi, "need 0 <= n_lo <= n_hi");
    Json j = header("equidistribution", g);
    j["result"] = equidistribution(g, v, n_lo, n_hi, periodic_n, shadow_level).to_json(g);
    return j;
}

Json axioms_report(const GammaGraph& g, double epsilon) {
    Json j = header("axioms", g);
    j["epsilon"] = epsilon;
    j["axioms"] = check_axioms(g, params(epsilon)).to_json();
    return j;
}

Json modulus_report(const AnnulusProblem& p, const std::string& family, double tol) {
    ModulusOptions opt;
    opt.tol = tol;
    if (family == "both") return mod_pair(p, opt).to_json(p);
    auto f = parse_family(family);
    auto r = modulus(p, f, opt);
    Json j;
    j["schema"] = "v1";
    j["kind"] = "modulus";
    j["problem"] = p.name;
    j["shingles"] = p.shingles.size();
    j["overlap_bound"] = p.shingles.overlap_bound();
    j["degenerate"] = p.degenerate();
    j["result"] = r.to_json(p);
    return j;
}

Json scan_report(const SystemSpec& spec, const std::string& annulus, int base_level, int n1, int n2, double tol) {
    if (spec.backend != Backend::Fsr) fail(ErrorKind::Unsupported, "conformality scan needs an fsr system");
    auto t = spec.tiling(std::max(n2, base_level));
    TileAnnulus a;
    if (annulus == "band") a = band_annulus(*t);
    else if (annulus == "vertex") a = vertex_ring_annulus(*t, base_level, branch_vertex(*t));
    else fail(ErrorKind::Validation, "annulus must be band or vertex, got '" + annulus + "'");
    ModulusOptions opt;
    opt.tol = tol;
    Json j = conformality_scan(spec, a, n1, n2, opt).to_json();
    j["system"] = spec.descriptor;
    return j;
}

}  // namespace cxc
