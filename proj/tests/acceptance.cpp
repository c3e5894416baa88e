// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "cxc/combmod.hpp"
#include "cxc/cxccheck.hpp"
#include "cxc/dynsys.hpp"
#include "cxc/errors.hpp"
#include "cxc/gamma.hpp"
#include "cxc/homnorm.hpp"
#include "cxc/hypmetric.hpp"
#include "cxc/measure.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cxc;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Accumulates failed sub-checks with a short note each.
class Ledger {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (!notes_.empty()) notes_ += "; ";
            notes_ += what;
        }
    }
    void note(const std::string& s) {
        if (!info_.empty()) info_ += ", ";
        info_ += s;
    }
    Outcome done() const { return {pass_, pass_ ? info_ : notes_}; }

private:
    bool pass_ = true;
    std::string notes_, info_;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

GammaGraph build(const std::string& src, int depth) {
    GammaOptions o;
    o.depth = depth;
    return GammaGraph::build(load_system(src), o);
}

std::vector<uint32_t> level_of(const GammaGraph& g, int n) {
    std::vector<uint32_t> out;
    for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) out.push_back(v);
    return out;
}

Outcome poincare() {
    Ledger l;
    double worst = 0;
    for (int d : {2, 3})
        for (uint64_t s1 : {2u, 4u})
            for (double ds : {0.1, 0.5, 1.0}) {
                double s = std::log(d) + ds;
                double closed = static_cast<double>(s1) / (std::exp(s) - d);
                auto r = poincare_series(s1, d, s);
                double err = std::abs(r.truncated - closed);
                worst = std::max(worst, err);
                l.expect(err <= 1e-10 * std::max(1.0, closed),
                         "d=" + std::to_string(d) + " |S(1)|=" + std::to_string(s1) + " s=log d+" + fmt(ds) +
                             " error " + fmt(err));
            }
    l.note("max error " + fmt(worst));
    return l.done();
}

Outcome degree_identity() {
    Ledger l;
    for (auto [src, depth] : {std::pair{"circle:d=2,arcs=4", 10}, std::pair{"barycentric", 5}}) {
        auto g = build(src, depth);
        const uint64_t d = static_cast<uint64_t>(g.spec().degree);
        const uint64_t s1 = g.sphere_size(1);
        uint64_t pow = 1;
        for (int n = 0; n + 1 <= depth; ++n) {
            uint64_t sum = 0;
            for (auto v : level_of(g, n + 1)) sum += g.vertex(v).degree;
            l.expect(sum == pow * s1, std::string(src) + " level " + std::to_string(n + 1) + ": " +
                                          std::to_string(sum) + " != " + std::to_string(pow * s1));
            pow *= d;
        }
        l.note(std::string(src) + " depth " + std::to_string(depth));
    }
    return l.done();
}

Outcome mu_s_normalization() {
    Ledger l;
    for (auto [src, depth] : {std::pair{"circle:d=2,arcs=4", 8}, std::pair{"barycentric", 4}}) {
        auto g = build(src, depth);
        double d = g.spec().degree;
        for (double ds : {0.1, 0.5, 1.0}) {
            auto m = mu_s(g, std::log(d) + ds);
            double err = std::abs(m.total() + m.tail - 1);
            l.expect(err < 1e-12, std::string(src) + " s=log d+" + fmt(ds) + " off by " + fmt(err));
            l.expect(m.tail >= 0, "negative tail");
        }
    }
    return l.done();
}

Outcome sphere_and_fibers() {
    Ledger l;
    for (auto [src, depth] : {std::pair{"circle:d=2,arcs=4", 8}, std::pair{"barycentric", 4}}) {
        auto g = build(src, depth);
        auto dist = oracle::bfs(g, 0);
        uint64_t sphere_bad = 0, fiber_bad = 0, fibers = 0;
        for (uint32_t v = 0; v < g.vertex_count(); ++v)
            if (dist[v] != static_cast<int>(g.level(v))) ++sphere_bad;
        const uint64_t d = static_cast<uint64_t>(g.spec().degree);
        std::vector<uint64_t> fiber(g.vertex_count(), 0);
        for (uint32_t v = g.level_begin(2); v < g.vertex_count(); ++v) fiber[g.F(v)] += g.vertex(v).local_degree;
        for (int n = 1; n <= depth - 1; ++n)
            for (auto xi : level_of(g, n)) {
                ++fibers;
                if (fiber[xi] != d) ++fiber_bad;
            }
        auto checks = verify_graph(g);
        l.expect(sphere_bad == 0 && checks.sphere_violations == 0,
                 std::string(src) + ": " + std::to_string(sphere_bad) + " sphere violations");
        l.expect(fiber_bad == 0 && checks.fiber_violations == 0,
                 std::string(src) + ": " + std::to_string(fiber_bad) + " fiber violations");
        l.note(std::string(src) + " " + std::to_string(g.vertex_count()) + " vertices, " + std::to_string(fibers) +
               " fibers");
    }
    return l.done();
}

Outcome visual_norm() {
    Ledger l;
    double worst = 0;
    for (auto [src, depth] : {std::pair{"circle:d=2,arcs=4", 8}, std::pair{"barycentric", 4}})
        for (double eps : {0.1, 0.25, 0.5}) {
            auto g = build(src, depth);
            auto d0 = oracle::visual_distances(g, 0, eps);
            auto lib = eps_distances(g, MetricParams{eps}, {0});
            for (uint32_t v = 0; v < g.vertex_count(); ++v) {
                double want = (1 - std::exp(-eps * g.level(v))) / eps;
                worst = std::max({worst, std::abs(lib[v] - want), std::abs(d0[v] - want)});
            }
        }
    l.expect(worst < 1e-12, "max error " + fmt(worst));
    l.note("max error " + fmt(worst));
    return l.done();
}

Outcome ball_mapping() {
    Ledger l;
    auto g = build("circle:d=2,arcs=4", 7);
    auto s = ball_check_all(g, MetricParams{0.25}, 10);
    l.expect(s.violations == 0, std::to_string(s.violations) + " violations");
    l.expect(s.vertices > 0, "no interior vertices checked");
    l.note(std::to_string(s.vertices) + " vertices, " + std::to_string(s.comparisons) + " comparisons");
    return l.done();
}

Outcome hyperbolicity() {
    Ledger l;
    auto t0 = std::chrono::steady_clock::now();
    auto tree = build("fullshift:d=2", 6);
    auto dt = hyperbolicity_delta(tree, DeltaMode::Exhaustive);
    l.expect(dt.delta == 0.0, "full shift delta " + fmt(dt.delta));
    auto g5 = build("circle:d=2,arcs=4", 5);
    auto g6 = build("circle:d=2,arcs=4", 6);
    auto d5 = hyperbolicity_delta(g5, DeltaMode::Exhaustive);
    auto d6 = hyperbolicity_delta(g6, DeltaMode::Exhaustive);
    l.expect(d5.delta == d6.delta, "delta(5) = " + fmt(d5.delta) + ", delta(6) = " + fmt(d6.delta));
    double o5 = oracle::delta_bruteforce(g5);
    l.expect(o5 == d5.delta, "oracle delta(5) = " + fmt(o5));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    l.expect(secs < 300, "took " + fmt(secs) + " s");
    l.note("delta(5) = delta(6) = " + fmt(d6.delta));
    return l.done();
}

Outcome shadow_lemma() {
    Ledger l;
    auto g = build("circle:d=2,arcs=4", 8);
    MetricParams p{0.25};
    auto r = shadow_lemma_ratios(g, p, 8);
    l.expect(!r.levels.empty() && r.levels.front() == 2 && r.levels.back() == 6, "levels are not 2..6");
    l.expect(r.window <= 10, "window " + fmt(r.window));
    l.expect(r.min_ratio >= 1 / r.window - 1e-12 && r.max_ratio <= r.window + 1e-12, "ratios outside the window");
    l.expect(std::abs(r.alpha - std::log(2.0) / 0.25) < 1e-12, "alpha " + fmt(r.alpha));
    l.note("C = " + fmt(r.window));
    return l.done();
}

Outcome equidistribution_check() {
    Ledger l;
    auto g = build("circle:d=2,arcs=4", 10);
    auto r = equidistribution(g, g.level_begin(1), 2, 8, 10, 3);
    bool mono = true;
    for (size_t i = 1; i < r.preimage_sup.size(); ++i) mono = mono && r.preimage_sup[i] <= r.preimage_sup[i - 1];
    l.expect(mono && r.monotone, "preimage discrepancy not monotone");
    l.expect(r.preimage_sup.size() == 7, "expected n = 2..8");
    l.expect(!r.preimage_sup.empty() && r.preimage_sup.back() < 0.05, "sup at n=8 is " + fmt(r.preimage_sup.back()));
    l.expect(r.periodic_supported && r.periodic_sup < 0.05, "periodic sup " + fmt(r.periodic_sup));
    l.expect(r.periodic_mass == "1023/1024", "periodic mass " + r.periodic_mass);
    // atoms at j/(2^10 - 1): one per fixed point of the tenth iterate
    auto per = periodic_measure(g, 10, 10);
    l.expect(per.exact_total() && *per.exact_total() == Rational(1023, 1024), "periodic measure total");
    l.note("sup(n=8) = " + fmt(r.preimage_sup.back()) + ", periodic " + fmt(r.periodic_sup));
    return l.done();
}

Outcome entropy() {
    Ledger l;
    MetricParams p{0.25};
    for (int d : {2, 3}) {
        auto g = build("circle:d=" + std::to_string(d) + ",arcs=4", d == 2 ? 9 : 6);
        auto e = entropy_report(g, p);
        l.expect(std::abs(e.v_estimate - std::log(d)) < 1e-2, "d=" + std::to_string(d) + " v " + fmt(e.v_estimate));
        l.expect(e.lower_bound <= e.v_estimate + 1e-2 && e.v_estimate <= std::log(d) + 1e-2, "chain violated");
        l.expect(e.chain_ok, "entropy chain flagged");
        l.expect(std::abs(e.alpha - std::log(d) / 0.25) < 1e-12, "alpha " + fmt(e.alpha));
        l.note("d=" + std::to_string(d) + " v=" + fmt(e.v_estimate));
    }
    return l.done();
}

Outcome axioms() {
    Ledger l;
    MetricParams p{0.25};
    auto c = check_axioms(build("circle:d=2,arcs=4", 8), p);
    l.expect(c.expansion.verdict == Verdict::Pass, "circle expansion " + std::string(verdict_name(c.expansion.verdict)));
    l.expect(c.expansion.theta >= 0.45 && c.expansion.theta <= 0.55, "circle theta " + fmt(c.expansion.theta));
    l.expect(c.irreducibility.verdict == Verdict::Pass, "circle irreducibility");
    l.expect(c.degree.verdict == Verdict::Pass && c.degree.p == 1, "circle degree");
    auto bg = build("barycentric", 5);
    auto b = check_axioms(bg, p);
    l.expect(b.expansion.verdict == Verdict::Pass, "barycentric expansion " + std::string(verdict_name(b.expansion.verdict)));
    l.expect(b.expansion.theta <= 0.61, "barycentric theta " + fmt(b.expansion.theta));
    l.expect(b.degree.verdict == Verdict::Growing, "barycentric degree " + std::string(verdict_name(b.degree.verdict)));
    l.expect(b.doubling.growth, "doubling probe did not flag growth");
    l.note("theta circle " + fmt(c.expansion.theta) + ", barycentric " + fmt(b.expansion.theta));
    return l.done();
}

Outcome comparability() {
    Ledger l;
    auto g = build("circle:d=2,arcs=4", 8);
    DiameterCache diam(g);
    auto r = local_comparability(g, diam);
    // independent: an arc's circle diameter is min(length, 1/2)
    auto arc = [&](uint32_t v) {
        const auto& c = g.cell(v);
        return std::min((c.hi - c.lo).to_double(), 0.5);
    };
    double lo = 1e300, hi = 0;
    for (int n = 1; n < 8; ++n)
        for (auto u : level_of(g, n))
            for (auto w : g.neighbors(u))
                if (static_cast<int>(g.level(w)) == n + 1) {
                    double q = arc(w) / arc(u);
                    lo = std::min(lo, q);
                    hi = std::max(hi, q);
                }
    double C = std::max(hi, 1 / lo);
    l.expect(C <= 4, "oracle C = " + fmt(C));
    l.expect(std::abs(r.C - C) < 1e-12, "reported C " + fmt(r.C) + " vs " + fmt(C));
    l.note("C = " + fmt(C) + " over " + std::to_string(r.pairs) + " pairs");
    return l.done();
}

Outcome moduli() {
    Ledger l;
    auto t0 = std::chrono::steady_clock::now();
    ModulusOptions opt;
    opt.tol = 1e-12;
    for (int k : {2, 3, 5}) {
        double m = modulus(path_problem(k), Family::Transversal, opt).mod;
        l.expect(std::abs(m - 1.0 / k) <= 1e-9, "path " + std::to_string(k) + ": " + fmt(m));
    }
    for (auto [m, k] : {std::pair{2, 3}, std::pair{3, 4}, std::pair{4, 2}}) {
        auto p = parallel_problem(m, k);
        double got = modulus(p, Family::Transversal, opt).mod;
        double ref = oracle::min_area(oracle::transversal_chains(p), p.shingles.size());
        l.expect(std::abs(got - ref) <= 1e-6 && std::abs(got - static_cast<double>(m) / k) <= 1e-6,
                 std::to_string(m) + "x" + std::to_string(k) + ": " + fmt(got) + " vs oracle " + fmt(ref));
    }
    auto ring = ring_problem(2, 4);
    l.expect(ring.shingles.size() == 8, "ring has " + std::to_string(ring.shingles.size()) + " shingles");
    auto mp = mod_pair(ring, opt);
    l.expect(mp.mod_inf <= mp.mod_sup + 1e-9, "mod_inf " + fmt(mp.mod_inf) + " > mod_sup " + fmt(mp.mod_sup));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    l.expect(secs < 10, "took " + fmt(secs) + " s");
    l.note("ring mod_inf " + fmt(mp.mod_inf) + " <= mod_sup " + fmt(mp.mod_sup) + ", " + fmt(secs) + " s");
    return l.done();
}

Mat rotation_block(double rho, double theta) {
    Mat m(2, 2);
    m << rho * std::cos(theta), -rho * std::sin(theta), rho * std::sin(theta), rho * std::cos(theta);
    return m;
}

Outcome homogeneous_norms() {
    Ledger l;
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> scale(-2, 2);
    auto sample = [&](int dim) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
        return Vec(v * std::exp(scale(rng)));
    };

    Mat baby_map = parse_matrix("3,0;0,4");
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
        Vec v = sample(2);
        worst = std::max(worst, std::abs(baby_norm(baby_map * v) / baby_norm(v) - 3));
    }
    l.expect(worst < 1e-12, "baby norm off by " + fmt(worst));

    Mat blocks = Mat::Zero(4, 4);
    blocks.topLeftCorner(2, 2) = rotation_block(2, 0.3);
    blocks.bottomRightCorner(2, 2) = rotation_block(3, 1.9);
    std::vector<std::pair<std::string, Mat>> maps{{"diag(3,4)", parse_matrix("3,0;0,4")},
                                                  {"2I", parse_matrix("2,0;0,2")},
                                                  {"diag(-3,4)", parse_matrix("-3,0;0,4")},
                                                  {"2R(0.7)", rotation_block(2, 0.7)},
                                                  {"2R(0.3)+3R(1.9)", blocks}};
    for (const auto& [name, m] : maps) {
        auto h = check_homothety(build_norm(m), 10000, 5);
        l.expect(h.max_rel_error < 1e-9 && h.max_map_rel_error < 1e-9, name + " homothety error " + fmt(h.max_rel_error));
    }

    // chain sandwich: baby and homogeneous norms on the abelian group, Heisenberg dilation
    size_t pairs = 0, bad = 0;
    auto sandwich = [&](const NormView& view, GroupOp g, double eps, int depth, int count) {
        auto q = quasi_triangle_q(view, g, g == GroupOp::Heisenberg ? 24 : 48);
        if (std::pow(q.ultra, eps) >= std::sqrt(2.0)) return;
        auto cm = chain_metric(view, g, eps, q.ultra, depth);
        for (int k = 0; k < count; ++k) {
            auto e = cm.eval(sample(view.dim), sample(view.dim));
            ++pairs;
            if (e.d_hat > e.rho * (1 + 1e-12) || e.d_hat < e.floor * (1 - 1e-12)) ++bad;
        }
    };
    sandwich(baby_view(), GroupOp::Abelian, 0.3, 6, 200);
    sandwich(view_of(build_norm(parse_matrix("3,0;0,4"))), GroupOp::Abelian, 0.3, 6, 200);
    sandwich(view_of(build_norm(parse_matrix("2"))), GroupOp::Abelian, 0.3, 6, 200);
    sandwich(view_of(build_norm(parse_matrix("2,0,0;0,2,0;0,0,4")).with_power(std::log(2.0))), GroupOp::Heisenberg,
             0.3, 4, 40);
    l.expect(pairs >= 600, "only " + std::to_string(pairs) + " sandwich pairs evaluated");
    l.expect(bad == 0, std::to_string(bad) + " pairs outside the sandwich");

    auto t = torus_homothety_check(random_close_pairs(1000, 3));
    l.expect(t.pairs == 1000 && t.max_ratio_error < 1e-12, "torus ratio error " + fmt(t.max_ratio_error));

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    l.expect(secs < 30, "took " + fmt(secs) + " s");
    l.note(std::to_string(pairs) + " sandwich pairs, " + fmt(secs) + " s");
    return l.done();
}

Outcome cross_validation() {
    Ledger l;
    auto geo = load_system("circle:d=2,arcs=4");
    auto sub = substitution_from_circle(*geo);
    GammaOptions o;
    o.depth = 5;
    auto a = GammaGraph::build(geo, o);
    auto b = GammaGraph::build(sub, o);
    std::string why;
    l.expect(oracle::isomorphic_by_labels(a, b, &why), why);
    l.note(std::to_string(a.vertex_count()) + " vertices, " + std::to_string(a.edge_count()) + " edges");
    return l.done();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Poincare series closed form", poincare},
        {"exact degree identity", degree_identity},
        {"mu_s normalization", mu_s_normalization},
        {"sphere property and fiber sums", sphere_and_fibers},
        {"visual norm identity", visual_norm},
        {"ball mapping law", ball_mapping},
        {"hyperbolicity", hyperbolicity},
        {"shadow lemma window", shadow_lemma},
        {"equidistribution", equidistribution_check},
        {"entropy", entropy},
        {"axiom verdicts", axioms},
        {"local comparability", comparability},
        {"combinatorial modulus", moduli},
        {"homogeneous norms", homogeneous_norms},
        {"backend cross-validation", cross_validation},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    o.detail.empty() ? "" : ": ", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
