#include "cxc/cxccheck.hpp"

#include "cxc/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace cxc {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
        case Verdict::Growing: return "GROWING";
        case Verdict::Unsupported: return "UNSUPPORTED";
    }
    return "?";
}

double DiameterCache::operator()(uint32_t v) {
    if (d_[v] < 0) d_[v] = g_.spec().diameter(g_.cell(v));
    return d_[v];
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> log_fit(const std::vector<int>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double ly = std::log(y[i]);
        sx += x[i];
        sy += ly;
        sxx += static_cast<double>(x[i]) * x[i];
        sxy += x[i] * ly;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

std::vector<std::pair<double, double>> running_max(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> out;
    double best = -kInf;
    for (const auto& [x, y] : pts) {
        best = std::max(best, y);
        if (!out.empty() && std::abs(out.back().first - x) <= 1e-12) {
            out.back().second = best;
        } else if (out.empty() || best > out.back().second + 1e-12) {
            out.emplace_back(x, best);
        }
    }
    return out;
}

Json envelope_json(const std::vector<std::pair<double, double>>& e) {
    Json a = Json::array();
    for (const auto& [x, y] : e) a.push_back(Json::array({x, y}));
    return a;
}

bool geometric(const GammaGraph& g) { return g.spec().is_geometric(); }

}  // namespace

ExpansionReport check_expansion(const GammaGraph& g, const MetricParams& p) {
    ExpansionReport r;
    const int N = g.depth();
    if (geometric(g)) {
        r.metric = "geometric";
        DiameterCache diam(g);
        for (int n = 1; n <= N; ++n) {
            double lo = kInf, hi = 0;
            for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
                double d = diam(v);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            r.levels.push_back(n);
            r.c_n.push_back(lo);
            r.d_n.push_back(hi);
        }
    } else {
        r.metric = "visual-shadow";
        const uint32_t b = g.level_begin(N), e = g.level_end(N);
        const size_t m = e - b;
        if (m > 4096) fail(ErrorKind::Budget, "expansion check: too many cells at the deepest level for shadow diameters");
        std::vector<double> dist(m * m);
        for (uint32_t i = 0; i < m; ++i) {
            auto d = eps_distances(g, p, {b + i});
            for (uint32_t j = 0; j < m; ++j) dist[i * m + j] = d[b + j];
        }
        for (int n = 1; n < N; ++n) {
            double lo = kInf, hi = 0;
            for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
                const auto s = shadow(g, v, 1).at_level(N);
                double best = 0;
                for (size_t x = 0; x < s.size(); ++x)
                    for (size_t y = x + 1; y < s.size(); ++y) best = std::max(best, dist[(s[x] - b) * m + (s[y] - b)]);
                lo = std::min(lo, best);
                hi = std::max(hi, best);
            }
            r.levels.push_back(n);
            r.c_n.push_back(lo);
            r.d_n.push_back(hi);
        }
    }
    bool decreasing = r.d_n.size() >= 2;
    for (size_t i = 0; i < r.d_n.size(); ++i) {
        if (!(r.d_n[i] > 0)) decreasing = false;
        if (i > 0 && !(r.d_n[i] < r.d_n[i - 1])) decreasing = false;
    }
    if (!decreasing) {
        r.verdict = Verdict::Fail;
        r.theta = 1;
        return r;
    }
    // skip the first level when there is room: level-0 covers are not similar to their pullbacks
    size_t start = r.levels.size() >= 3 ? 1 : 0;
    std::vector<int> x(r.levels.begin() + static_cast<std::ptrdiff_t>(start), r.levels.end());
    std::vector<double> y(r.d_n.begin() + static_cast<std::ptrdiff_t>(start), r.d_n.end());
    r.theta = std::exp(log_fit(x, y).first);
    r.c_prime = 0;
    for (size_t i = 0; i < r.d_n.size(); ++i)
        for (size_t j = i + 1; j < r.d_n.size(); ++j)
            r.c_prime = std::max(r.c_prime, (r.d_n[j] / r.d_n[i]) / std::pow(r.theta, static_cast<double>(j - i)));
    r.verdict = r.theta < 1 ? Verdict::Pass : Verdict::Fail;
    return r;
}

Json ExpansionReport::to_json() const {
    return Json{{"verdict", verdict_name(verdict)}, {"metric", metric}, {"levels", levels}, {"c_n", c_n},
                {"d_n", d_n},                        {"theta", theta},   {"C_prime", c_prime}};
}

IrreducibilityReport check_irreducibility(const GammaGraph& g) {
    IrreducibilityReport r;
    const int N = g.depth();
    const uint32_t roots = static_cast<uint32_t>(g.sphere_size(1));
    std::vector<std::vector<char>> prev;
    for (int n = 1; n < N; ++n) {
        std::vector<std::vector<char>> reach(roots, std::vector<char>(roots, 0));
        bool all = true;
        for (uint32_t u = 0; u < roots; ++u) {
            std::vector<char> cur(g.vertex_count(), 0);
            std::vector<uint32_t> layer;
            for (uint32_t v = g.level_begin(n + 1); v < g.level_end(n + 1); ++v)
                if (g.vertex(v).addr.root == u) layer.push_back(v);
            for (int k = n + 1; k > 1; --k) {
                std::vector<uint32_t> up;
                for (auto v : layer)
                    for (auto w : g.neighbors(v))
                        if (static_cast<int>(g.level(w)) == k - 1 && !cur[w]) {
                            cur[w] = 1;
                            up.push_back(w);
                        }
                layer.swap(up);
            }
            for (auto v : layer) reach[u][v - 1] = 1;
            all = all && std::all_of(reach[u].begin(), reach[u].end(), [](char c) { return c != 0; });
        }
        r.reach.clear();
        for (uint32_t u = 0; u < roots; ++u) {
            std::vector<std::string> labels;
            for (uint32_t v = 0; v < roots; ++v)
                if (reach[u][v]) labels.push_back(g.label(v + 1));
            r.reach.push_back(labels);
        }
        if (all) {
            r.verdict = Verdict::Pass;
            r.witness = n;
            return r;
        }
        // a proper subset that stopped growing is a failure witness at this depth
        r.verdict = (!prev.empty() && prev == reach) ? Verdict::Fail : Verdict::Inconclusive;
        prev = reach;
    }
    return r;
}

Json IrreducibilityReport::to_json() const {
    Json j{{"verdict", verdict_name(verdict)}};
    if (witness >= 0) j["witness_level"] = witness;
    j["reach"] = reach;
    return j;
}

DegreeReport check_degree(const GammaGraph& g) {
    DegreeReport r;
    const int N = g.depth();
    for (int n = 1; n <= N; ++n) {
        uint64_t m = 0, b = 0;
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
            m = std::max(m, g.vertex(v).degree);
            if (g.vertex(v).degree > 1) ++b;
        }
        r.max_degree.push_back(m);
        r.branched.push_back(b);
    }
    const int window = (N + 1) / 2;
    bool stable = N >= 2;
    for (int i = N - window; i < N; ++i)
        if (r.max_degree[static_cast<size_t>(i)] != r.max_degree.back()) stable = false;
    r.p = *std::max_element(r.max_degree.begin(), r.max_degree.end());
    if (N >= 2) r.growth_ratio = static_cast<double>(r.max_degree.back()) / static_cast<double>(r.max_degree[r.max_degree.size() - 2]);
    if (stable && r.p == r.max_degree.back()) {
        r.verdict = Verdict::Pass;
    } else {
        r.verdict = Verdict::Growing;
        r.advisory = "local degrees keep growing; the limit space is expected to fail the doubling property";
    }
    return r;
}

Json DegreeReport::to_json() const {
    Json j{{"verdict", verdict_name(verdict)}, {"max_degree", max_degree}, {"branched_vertices", branched}};
    if (verdict == Verdict::Pass) {
        j["p"] = p;
    } else {
        j["growth_ratio"] = growth_ratio;
        j["advisory"] = advisory;
    }
    return j;
}

double arc_roundness(const Rational& lo, const Rational& hi, const Rational& a) {
    require(lo < a && a < hi, "arc_roundness: basepoint must lie inside the arc");
    double left = (a - lo).to_double(), right = (hi - a).to_double();
    double L = std::min(std::max(left, right), 0.5);
    return L / std::min(left, right);
}

RoundnessReport roundness_distortion(const GammaGraph& g, int denominator) {
    if (g.spec().backend != Backend::GeometricCircle)
        fail(ErrorKind::Unsupported, "roundness is sampled on circle systems only");
    require(denominator >= 2, "roundness: grid denominator must be at least 2");
    RoundnessReport r;
    r.denominator = denominator;
    r.min_round = kInf;
    const int N = g.depth();
    auto value = [&](uint32_t v, int j) {
        const Cell& c = g.cell(v);
        Rational a = c.lo + (c.hi - c.lo) * Rational(j, denominator);
        return arc_roundness(c.lo, c.hi, a);
    };
    std::vector<std::pair<double, double>> plus, minus;
    for (int n = 1; n <= N; ++n) {
        double K = 0;
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
            for (int j = 1; j < denominator; ++j) {
                double rv = value(v, j);
                K = std::max(K, rv);
                r.min_round = std::min(r.min_round, rv);
                ++r.samples;
                // pullback cells scale the arc, so the matched basepoint keeps its fraction
                if (n >= 2) {
                    double base = value(g.F(v), j);
                    plus.emplace_back(base, rv);
                    minus.emplace_back(rv, base);
                }
            }
        }
        r.levels.push_back(n);
        r.level_K.push_back(K);
        r.K = std::max(r.K, K);
    }
    r.rho_plus = running_max(plus);
    r.rho_minus = running_max(minus);
    r.verdict = (r.level_K.size() >= 2 && std::abs(r.level_K.back() - r.level_K[r.level_K.size() - 2]) <= 1e-9)
                    ? Verdict::Pass
                    : Verdict::Inconclusive;
    return r;
}

Json RoundnessReport::to_json() const {
    return Json{{"verdict", verdict_name(verdict)}, {"grid_denominator", denominator},
                {"levels", levels},                 {"level_K", level_K},
                {"K", K},                           {"min_round", min_round},
                {"samples", samples},               {"rho_plus", envelope_json(rho_plus)},
                {"rho_minus", envelope_json(rho_minus)}};
}

DiameterDistortionReport diameter_distortion(const GammaGraph& g, DiameterCache& diam, int max_level) {
    if (!geometric(g)) fail(ErrorKind::Unsupported, "diameter distortion needs a geometric backend");
    const SystemSpec& s = g.spec();
    const int N = g.depth();
    if (max_level < 0) max_level = N - 1;
    DiameterDistortionReport r;
    std::vector<std::pair<double, double>> plus, minus;
    for (int n = 2; n <= max_level; ++n) {
        for (uint32_t u = g.level_begin(n); u < g.level_end(n); ++u) {
            // nested cells within two levels below
            std::vector<uint32_t> inner{u};
            std::set<uint32_t> seen{u};
            std::vector<uint32_t> layer{u};
            for (int k = n; k < std::min(n + 2, max_level); ++k) {
                std::vector<uint32_t> next;
                for (auto v : layer)
                    for (auto w : g.neighbors(v))
                        if (static_cast<int>(g.level(w)) == k + 1 && seen.insert(w).second) next.push_back(w);
                for (auto w : next)
                    if (s.contains(g.cell(u), g.cell(w))) inner.push_back(w);
                layer.swap(next);
            }
            const auto& vu = g.vertex(u);
            for (auto w : inner) {
                const auto& vw = g.vertex(w);
                double base = diam(w) / diam(u);
                for (uint32_t i = 0; i < vu.child_count; ++i) {
                    uint32_t cu = vu.first_child + i;
                    for (uint32_t j = 0; j < vw.child_count; ++j) {
                        uint32_t cw = vw.first_child + j;
                        if (cw != cu && !s.contains(g.cell(cu), g.cell(cw))) continue;
                        double lift = diam(cw) / diam(cu);
                        plus.emplace_back(base, lift);
                        minus.emplace_back(lift, base);
                        r.max_log_gap = std::max(r.max_log_gap, std::abs(std::log(lift / base)));
                        ++r.pairs;
                    }
                }
            }
        }
    }
    r.delta_plus = running_max(plus);
    r.delta_minus = running_max(minus);
    for (const auto* e : {&r.delta_plus, &r.delta_minus})
        for (size_t i = 1; i < e->size(); ++i)
            if ((*e)[i].second < (*e)[i - 1].second) r.increasing = false;
    r.verdict = r.pairs > 0 && r.increasing ? Verdict::Pass : Verdict::Inconclusive;
    return r;
}

Json DiameterDistortionReport::to_json() const {
    return Json{{"verdict", verdict_name(verdict)},     {"pairs", pairs},
                {"max_log_gap", max_log_gap},           {"increasing", increasing},
                {"delta_plus", envelope_json(delta_plus)}, {"delta_minus", envelope_json(delta_minus)}};
}

DoublingReport doubling_probe(const GammaGraph& g, int N) {
    require(N >= 3 && N <= g.depth(), "doubling_probe: need 3 <= N <= depth");
    DoublingReport r;
    // deep shadows as bitsets over S(N)
    const uint32_t base = g.level_begin(N);
    const size_t words = (g.sphere_size(N) + 63) / 64;
    using Bits = std::vector<uint64_t>;
    // descending closures bottom-up, then shadows are unions over radius-1 balls
    std::vector<Bits> down(g.level_end(N), Bits(words, 0));
    for (uint32_t x = base; x < g.level_end(N); ++x) down[x][(x - base) / 64] |= uint64_t{1} << ((x - base) % 64);
    for (int n = N - 1; n >= 1; --n)
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v)
            for (auto x : g.neighbors(v))
                if (static_cast<int>(g.level(x)) == n + 1)
                    for (size_t i = 0; i < words; ++i) down[v][i] |= down[x][i];
    std::vector<Bits> memo(g.vertex_count());
    auto deep = [&](uint32_t v) -> const Bits& {
        if (memo[v].empty()) {
            memo[v] = down[v];
            for (auto x : g.neighbors(v))
                if (x != 0)
                    for (size_t i = 0; i < words; ++i) memo[v][i] |= down[x][i];
        }
        return memo[v];
    };
    for (int n = 2; n < N; ++n) {
        uint64_t best = 0, at_branch = 0, branch_deg = 0;
        std::string where, branch;
        for (uint32_t w = g.level_begin(n); w < g.level_end(n); ++w) {
            Bits left = deep(w);
            // shadow members one level below w, from the radius-1 ball
            std::vector<uint32_t> ball{w}, mid, cands;
            for (auto x : g.neighbors(w)) ball.push_back(x);
            for (auto b : ball) {
                if (static_cast<int>(g.level(b)) == n) mid.push_back(b);
                if (static_cast<int>(g.level(b)) == n + 1) cands.push_back(b);
                if (static_cast<int>(g.level(b)) == n - 1)
                    for (auto x : g.neighbors(b))
                        if (static_cast<int>(g.level(x)) == n) mid.push_back(x);
            }
            std::sort(mid.begin(), mid.end());
            mid.erase(std::unique(mid.begin(), mid.end()), mid.end());
            for (auto m : mid)
                for (auto x : g.neighbors(m))
                    if (static_cast<int>(g.level(x)) == n + 1) cands.push_back(x);
            std::sort(cands.begin(), cands.end());
            cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
            // lazy greedy: gains only shrink, so stale heap keys are upper bounds
            auto gain_of = [&](uint32_t c) {
                const Bits& b = deep(c);
                int gain = 0;
                for (size_t i = 0; i < words; ++i) gain += std::popcount(b[i] & left[i]);
                return gain;
            };
            std::priority_queue<std::pair<int, int64_t>> heap;
            for (auto c : cands) heap.emplace(gain_of(c), -static_cast<int64_t>(c));
            uint64_t used = 0;
            while (!heap.empty()) {
                auto [stale, neg] = heap.top();
                heap.pop();
                if (stale == 0) break;
                auto c = static_cast<uint32_t>(-neg);
                int gain = gain_of(c);
                if (!heap.empty() && gain < heap.top().first) {
                    heap.emplace(gain, neg);
                    continue;
                }
                if (gain == 0) break;
                const Bits& b = deep(c);
                for (size_t i = 0; i < words; ++i) left[i] &= ~b[i];
                ++used;
            }
            if (used > best) {
                best = used;
                where = g.label(w);
            }
            if (g.vertex(w).degree > branch_deg) {
                branch_deg = g.vertex(w).degree;
                at_branch = used;
                branch = g.label(w);
            }
        }
        r.levels.push_back(n);
        r.max_cover.push_back(best);
        r.max_cover_at.push_back(where);
        r.branch_cover.push_back(at_branch);
        r.branch_vertex.push_back(branch);
    }
    r.growth = r.branch_cover.size() >= 2;
    for (size_t i = 1; i < r.branch_cover.size(); ++i)
        if (r.branch_cover[i] <= r.branch_cover[i - 1]) r.growth = false;
    return r;
}

Json DoublingReport::to_json() const {
    return Json{{"levels", levels},
                {"max_cover", max_cover},
                {"max_cover_at", max_cover_at},
                {"branch_cover", branch_cover},
                {"branch_vertex", branch_vertex},
                {"growth_flag", growth}};
}

ComparabilityReport local_comparability(const GammaGraph& g, DiameterCache& diam) {
    if (!geometric(g)) fail(ErrorKind::Unsupported, "local comparability needs a geometric backend");
    ComparabilityReport r;
    r.min_ratio = kInf;
    for (int n = 1; n < g.depth(); ++n)
        for (uint32_t u = g.level_begin(n); u < g.level_end(n); ++u)
            for (auto w : g.neighbors(u)) {
                if (static_cast<int>(g.level(w)) != n + 1) continue;
                double q = diam(w) / diam(u);
                r.min_ratio = std::min(r.min_ratio, q);
                r.max_ratio = std::max(r.max_ratio, q);
                ++r.pairs;
            }
    r.C = r.pairs ? std::max(r.max_ratio, 1.0 / r.min_ratio) : 0;
    r.verdict = r.pairs ? Verdict::Pass : Verdict::Inconclusive;
    return r;
}

Json ComparabilityReport::to_json() const {
    return Json{{"verdict", verdict_name(verdict)}, {"C", C}, {"min_ratio", min_ratio}, {"max_ratio", max_ratio},
                {"pairs", pairs}};
}

LebesgueReport lebesgue_numbers(const GammaGraph& g) {
    if (g.spec().backend != Backend::GeometricCircle)
        fail(ErrorKind::Unsupported, "Lebesgue numbers are computed on circle systems only");
    LebesgueReport r;
    for (int n = 1; n <= g.depth(); ++n) {
        std::vector<Rational> cand;
        uint32_t b = g.level_begin(n), e = g.level_end(n);
        for (uint32_t v = b; v < e; ++v) {
            cand.push_back(g.cell(v).lo.frac());
            cand.push_back(g.cell(v).hi.frac());
            for (auto w : g.neighbors(v)) {
                if (g.level(w) != static_cast<uint32_t>(n) || w < v) continue;
                // tents of overlapping arcs cross halfway between facing endpoints
                cand.push_back(((g.cell(v).lo + g.cell(w).hi) / Rational(2)).frac());
                cand.push_back(((g.cell(w).lo + g.cell(v).hi) / Rational(2)).frac());
            }
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        double delta = kInf, mesh = 0;
        for (uint32_t v = b; v < e; ++v) mesh = std::max(mesh, std::min((g.cell(v).hi - g.cell(v).lo).to_double(), 0.5));
        for (const auto& x : cand) {
            double best = 0;
            for (uint32_t v = b; v < e; ++v) {
                const Cell& c = g.cell(v);
                for (int64_t m = 0; m <= 1; ++m) {
                    Rational y = x + Rational(m);
                    if (c.lo <= y && y <= c.hi) best = std::max(best, std::min((y - c.lo).to_double(), (c.hi - y).to_double()));
                }
            }
            delta = std::min(delta, best);
        }
        r.levels.push_back(n);
        r.delta_n.push_back(delta);
        r.ratio_to_mesh.push_back(delta / mesh);
    }
    r.verdict = Verdict::Pass;
    for (double d : r.delta_n)
        if (!(d > 0)) r.verdict = Verdict::Fail;
    return r;
}

Json LebesgueReport::to_json() const {
    return Json{{"verdict", verdict_name(verdict)}, {"levels", levels}, {"delta_n", delta_n}, {"ratio_to_mesh", ratio_to_mesh}};
}

AxiomReport check_axioms(const GammaGraph& g, const MetricParams& p, int denominator) {
    AxiomReport a;
    a.expansion = check_expansion(g, p);
    a.irreducibility = check_irreducibility(g);
    a.degree = check_degree(g);
    if (g.depth() >= 3) a.doubling = doubling_probe(g, g.depth());
    if (geometric(g)) {
        DiameterCache diam(g);
        a.diameter = diameter_distortion(g, diam);
        a.comparability = local_comparability(g, diam);
    }
    if (g.spec().backend == Backend::GeometricCircle) {
        a.roundness = roundness_distortion(g, denominator);
        a.lebesgue = lebesgue_numbers(g);
    }
    return a;
}

Json AxiomReport::to_json() const {
    Json j;
    j["expansion"] = expansion.to_json();
    j["irreducibility"] = irreducibility.to_json();
    j["degree"] = degree.to_json();
    j["roundness"] = roundness.verdict == Verdict::Unsupported ? Json{{"verdict", "UNSUPPORTED"}} : roundness.to_json();
    j["diameter_distortion"] =
        diameter.verdict == Verdict::Unsupported ? Json{{"verdict", "UNSUPPORTED"}} : diameter.to_json();
    j["doubling_probe"] = doubling.to_json();
    j["local_comparability"] =
        comparability.verdict == Verdict::Unsupported ? Json{{"verdict", "UNSUPPORTED"}} : comparability.to_json();
    j["lebesgue_numbers"] = lebesgue.verdict == Verdict::Unsupported ? Json{{"verdict", "UNSUPPORTED"}} : lebesgue.to_json();
    return j;
}

}  // namespace cxc
