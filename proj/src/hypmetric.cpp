#include "cxc/hypmetric.hpp"

#include "cxc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace cxc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTie = 1e-9;
}  // namespace

double vertical_weight(uint32_t n, double eps) { return std::exp(-eps * n) * (-std::expm1(-eps)) / eps; }

double horizontal_weight(uint32_t n, double eps) { return 2.0 * std::exp(-eps * n) * (-std::expm1(-eps / 2)) / eps; }

double norm_formula(uint32_t n, double eps) { return -std::expm1(-eps * n) / eps; }

double edge_weight(const GammaGraph& g, uint32_t u, uint32_t v, const MetricParams& p) {
    uint32_t a = g.level(u), b = g.level(v);
    return a == b ? horizontal_weight(a, p.epsilon) : vertical_weight(std::min(a, b), p.epsilon);
}

std::vector<double> eps_distances(const GammaGraph& g, const MetricParams& p, const std::vector<uint32_t>& sources,
                                  double limit) {
    require(p.epsilon > 0, "epsilon must be positive");
    std::vector<double> dist(g.vertex_count(), kInf);
    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (auto s : sources) {
        dist[s] = 0;
        pq.emplace(0.0, s);
    }
    // weights depend only on the level pair, so cache them
    std::vector<double> vw(static_cast<size_t>(g.depth()) + 1), hw(static_cast<size_t>(g.depth()) + 1);
    for (int n = 0; n <= g.depth(); ++n) {
        vw[static_cast<size_t>(n)] = vertical_weight(static_cast<uint32_t>(n), p.epsilon);
        hw[static_cast<size_t>(n)] = horizontal_weight(static_cast<uint32_t>(n), p.epsilon);
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        if (limit >= 0 && d > limit) break;
        uint32_t lv = g.level(v);
        for (auto w : g.neighbors(v)) {
            uint32_t lw = g.level(w);
            double nd = d + (lv == lw ? hw[lv] : vw[std::min(lv, lw)]);
            if (nd < dist[w]) {
                dist[w] = nd;
                pq.emplace(nd, w);
            }
        }
    }
    if (limit >= 0)
        for (auto& d : dist)
            if (d > limit) d = kInf;
    return dist;
}

double dist_eps(const GammaGraph& g, const MetricParams& p, uint32_t u, uint32_t v) {
    if (u == v) return 0;
    return eps_distances(g, p, {u})[v];
}

double gromov_product(const GammaGraph& g, uint32_t u, uint32_t v) {
    auto d = bfs_distances(g, u);
    return 0.5 * (static_cast<double>(g.level(u)) + g.level(v) - d[v]);
}

DeltaReport hyperbolicity_delta(const GammaGraph& g, DeltaMode mode, uint64_t seed, uint64_t count, size_t cap) {
    const size_t n = g.vertex_count();
    DeltaReport r;
    r.mode = mode;
    r.seed = seed;
    if (mode == DeltaMode::Exhaustive && n > cap)
        fail(ErrorKind::Budget, "exhaustive hyperbolicity scan limited to " + std::to_string(cap) + " vertices, graph has " +
                                    std::to_string(n) + " (use --mode sampled)");
    // doubled Gromov products are integers
    std::vector<int32_t> gp(n * n);
    for (uint32_t x = 0; x < n; ++x) {
        auto d = bfs_distances(g, x);
        for (uint32_t y = 0; y < n; ++y)
            gp[x * n + y] = static_cast<int32_t>(g.level(x) + g.level(y)) - d[y];
    }
    int32_t best = 0;
    if (mode == DeltaMode::Exhaustive) {
        for (uint32_t x = 0; x < n; ++x) {
            const int32_t* gx = &gp[x * n];
            for (uint32_t z = x; z < n; ++z) {
                const int32_t* gz = &gp[z * n];
                int32_t target = gx[z] + best;
                for (uint32_t y = 0; y < n; ++y) {
                    int32_t m = std::min(gx[y], gz[y]);
                    if (m > target) {
                        best = m - gx[z];
                        target = gx[z] + best;
                        r.witness = {x, y, z};
                    }
                }
            }
        }
        r.triples = static_cast<uint64_t>(n) * n * (n + 1) / 2;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<uint64_t> pick(0, n - 1);
        for (uint64_t i = 0; i < count; ++i) {
            auto x = static_cast<uint32_t>(pick(rng)), y = static_cast<uint32_t>(pick(rng)),
                 z = static_cast<uint32_t>(pick(rng));
            int32_t v = std::min(gp[x * n + y], gp[y * n + z]) - gp[x * n + z];
            if (v > best) {
                best = v;
                r.witness = {x, y, z};
            }
        }
        r.triples = count;
    }
    r.delta = best / 2.0;
    return r;
}

Json DeltaReport::to_json(const GammaGraph& g) const {
    Json j;
    j["delta"] = delta;
    j["mode"] = mode == DeltaMode::Exhaustive ? "exhaustive" : "sampled";
    j["triples"] = triples;
    if (mode == DeltaMode::Sampled) j["seed"] = seed;
    j["witness"] = {g.label(witness[0]), g.label(witness[1]), g.label(witness[2])};
    return j;
}

bool ShadowSet::contains(const GammaGraph& g, uint32_t v) const {
    const auto& m = members[g.level(v)];
    return std::binary_search(m.begin(), m.end(), v);
}

ShadowSet shadow(const GammaGraph& g, uint32_t w, int radius) {
    require(w != 0, "shadow: base vertex must differ from o");
    require(radius >= 0, "shadow: radius must be nonnegative");
    ShadowSet s;
    s.base = w;
    s.radius = radius;
    s.members.assign(static_cast<size_t>(g.depth()) + 1, {});
    // ball by BFS with a hop limit; sets stay small so sorted vectors beat per-graph arrays
    std::vector<uint32_t> ball{w}, frontier{w};
    for (int r = 0; r < radius; ++r) {
        std::vector<uint32_t> next;
        for (auto v : frontier)
            for (auto x : g.neighbors(v)) next.push_back(x);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        std::vector<uint32_t> fresh;
        std::set_difference(next.begin(), next.end(), ball.begin(), ball.end(), std::back_inserter(fresh));
        std::vector<uint32_t> merged;
        std::merge(ball.begin(), ball.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
        ball.swap(merged);
        frontier.swap(fresh);
    }
    for (auto v : ball) s.members[g.level(v)].push_back(v);
    for (int n = 0; n < g.depth(); ++n) {
        auto& below = s.members[static_cast<size_t>(n) + 1];
        for (auto v : s.members[static_cast<size_t>(n)])
            for (auto x : g.neighbors(v))
                if (g.level(x) == static_cast<uint32_t>(n) + 1) below.push_back(x);
        std::sort(below.begin(), below.end());
        below.erase(std::unique(below.begin(), below.end()), below.end());
    }
    return s;
}

double set_diameter(const GammaGraph& g, const MetricParams& p, const std::vector<uint32_t>& set) {
    double best = 0;
    for (size_t i = 0; i + 1 < set.size(); ++i) {
        auto d = eps_distances(g, p, {set[i]});
        for (size_t j = i + 1; j < set.size(); ++j) best = std::max(best, d[set[j]]);
    }
    return best;
}

ShadowConstants shadow_constants(const GammaGraph& g, const MetricParams& p, int lo, int hi) {
    require(lo >= 1 && hi <= g.depth() && lo <= hi, "shadow_constants: bad level range");
    ShadowConstants c;
    for (int n = lo; n <= hi; ++n) {
        double best = 0;
        for (uint32_t w = g.level_begin(n); w < g.level_end(n); ++w) {
            auto s = shadow(g, w, 1);
            std::vector<uint32_t> all;
            for (int k = n; k <= g.depth(); ++k) all.insert(all.end(), s.at_level(k).begin(), s.at_level(k).end());
            best = std::max(best, set_diameter(g, p, all) * std::exp(p.epsilon * n));
        }
        c.levels.push_back(n);
        c.c_r.push_back(best);
        c.max_c = std::max(c.max_c, best);
    }
    return c;
}

Json ShadowConstants::to_json() const {
    return Json{{"levels", levels}, {"C_R", c_r}, {"max", max_c}};
}

BoundaryAddress address_of(const GammaGraph& g, const Rational& x, int choice) {
    const SystemSpec& s = g.spec();
    if (s.backend != Backend::GeometricCircle) fail(ErrorKind::Unsupported, "address_of needs the geometric-circle backend");
    const int N = g.depth();
    std::vector<Rational> orbit{x.frac()};
    for (int k = 1; k < N; ++k) orbit.push_back((orbit.back() * Rational(s.degree)).frac());
    BoundaryAddress a;
    for (int n = 1; n <= N; ++n) {
        // cell of level n containing x: root containing f^{n-1}x, then pull back
        const Rational& y = orbit[static_cast<size_t>(n) - 1];
        std::vector<uint32_t> roots;
        for (uint32_t r = 0; r < s.elements.size(); ++r)
            if (s.contains_point(g.cell(1 + r), y)) roots.push_back(r);
        require(!roots.empty(), "address_of: point not covered");
        uint32_t v = 1 + roots[static_cast<size_t>(choice) % roots.size()];
        for (int k = n - 2; k >= 0; --k) {
            const Rational& z = orbit[static_cast<size_t>(k)];
            const auto& vx = g.vertex(v);
            std::optional<uint32_t> next;
            for (uint32_t i = 0; i < vx.child_count && !next; ++i)
                if (s.contains_point(g.cell(vx.first_child + i), z)) next = vx.first_child + i;
            if (!next) fail(ErrorKind::Internal, "address_of: lost the point while pulling back");
            v = *next;
        }
        a.chain.push_back(v);
    }
    return a;
}

std::pair<double, double> boundary_distance(const GammaGraph& g, const MetricParams& p, const BoundaryAddress& a,
                                            const BoundaryAddress& b) {
    require(!a.chain.empty() && a.chain.size() == b.chain.size(), "boundary_distance: addresses of unequal depth");
    const double eps = p.epsilon;
    const auto N = static_cast<double>(a.chain.size());
    return {dist_eps(g, p, a.chain.back(), b.chain.back()), 4.0 * std::exp(-eps * N) / eps};
}

std::pair<double, double> dist_to_boundary(const GammaGraph& g, const MetricParams& p, uint32_t v) {
    require(v != 0, "dist_to_boundary: vertex must differ from o");
    const double eps = p.epsilon;
    auto d = eps_distances(g, p, {v});
    double best = kInf;
    for (uint32_t w = g.level_begin(g.depth()); w < g.level_end(g.depth()); ++w) best = std::min(best, d[w]);
    return {std::exp(-eps * g.level(v)) / eps, best + std::exp(-eps * g.depth()) / eps};
}

std::vector<double> default_radii(const GammaGraph& g, const MetricParams& p, uint32_t xi, int count) {
    const double eps = p.epsilon;
    const double k = g.level(xi), N = g.depth();
    double rmax = std::min(norm_formula(g.level(xi) - 1, eps), (std::exp(-eps * (k - 1)) - std::exp(-eps * (N - 1))) / eps);
    std::vector<double> r;
    for (int j = 1; j <= count; ++j) r.push_back(rmax * j / (count + 1));
    return r;
}

BallCheck ball_image_check(const GammaGraph& g, const MetricParams& p, uint32_t xi, const std::vector<double>& radii) {
    require(g.level(xi) >= 2, "ball_image_check: vertex level must be at least 2");
    BallCheck c;
    c.xi = xi;
    c.radii = radii;
    if (radii.empty()) return c;
    const double shrink = std::exp(-p.epsilon);
    double rmax = *std::max_element(radii.begin(), radii.end());
    auto du = eps_distances(g, p, {xi}, rmax * shrink + 2 * kTie);
    auto dv = eps_distances(g, p, {g.F(xi)}, rmax + 2 * kTie);
    for (double r : radii) {
        // F-image distance for each vertex: min over preimages within the small ball
        std::vector<double> img(g.vertex_count(), kInf);
        for (uint32_t w = 0; w < g.vertex_count(); ++w)
            if (du[w] <= r * shrink + kTie) img[g.F(w)] = std::min(img[g.F(w)], du[w] / shrink);
        for (uint32_t w = 0; w < g.vertex_count(); ++w) {
            bool a = img[w] <= r, b = dv[w] <= r;
            if (a == b) continue;
            ++c.comparisons;
            // boundary ties within tolerance are not violations
            double da = img[w], db = dv[w];
            if ((a && std::abs(db - r) <= kTie) || (b && std::abs(da - r) <= kTie)) continue;
            c.violations.push_back({r, w, a});
        }
        for (uint32_t w = 0; w < g.vertex_count(); ++w)
            if (img[w] <= r || dv[w] <= r) ++c.comparisons;
    }
    return c;
}

BallSummary ball_check_all(const GammaGraph& g, const MetricParams& p, int radii_count) {
    BallSummary s;
    for (int n = 2; n <= g.depth() - 2; ++n) {
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
            auto c = ball_image_check(g, p, v, default_radii(g, p, v, radii_count));
            ++s.vertices;
            s.comparisons += c.comparisons;
            s.violations += c.violations.size();
            if (!c.violations.empty() && s.failing.size() < 10) s.failing.push_back(std::move(c));
        }
    }
    return s;
}

Json BallSummary::to_json(const GammaGraph& g) const {
    Json j;
    j["vertices_checked"] = vertices;
    j["comparisons"] = comparisons;
    j["violations"] = violations;
    Json f = Json::array();
    for (const auto& c : failing) {
        Json v = Json::array();
        for (const auto& x : c.violations)
            v.push_back(Json{{"radius", x.radius}, {"vertex", g.label(x.vertex)}, {"side", x.in_image ? "image" : "ball"}});
        f.push_back(Json{{"xi", g.label(c.xi)}, {"violations", v}});
    }
    j["failing"] = f;
    return j;
}

}  // namespace cxc
