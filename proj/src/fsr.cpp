#include "cxc/fsr.hpp"

#include "cxc/errors.hpp"
#include "cxc/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cxc::fsr {

namespace {

using Weights = std::vector<std::vector<int64_t>>;

// frame corners in units of the scale
std::vector<std::array<int64_t, 2>> frame_corners(int corners) {
    if (corners == 3) return {{0, 0}, {1, 0}, {0, 1}};
    return {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
}

__int128 cross(const std::array<__int128, 2>& o, const std::array<__int128, 2>& a,
               const std::array<__int128, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::array<__int128, 2> weighted_point(const Weights& w, int color, int corners) {
    auto fc = frame_corners(corners);
    std::array<__int128, 2> p{0, 0};
    for (int c = 0; c < corners; ++c) {
        p[0] += static_cast<__int128>(w[static_cast<size_t>(color)][static_cast<size_t>(c)]) * fc[static_cast<size_t>(c)][0];
        p[1] += static_cast<__int128>(w[static_cast<size_t>(color)][static_cast<size_t>(c)]) * fc[static_cast<size_t>(c)][1];
    }
    return p;
}

__int128 signed_area2(const Weights& w, int corners) {
    auto p0 = weighted_point(w, 0, corners);
    auto p1 = weighted_point(w, 1, corners);
    if (corners == 3) return cross(p0, p1, weighted_point(w, 2, corners));
    auto p2 = weighted_point(w, 2, corners);
    return cross(p0, p1, p2) + cross(p0, p2, weighted_point(w, 3, corners));
}

}  // namespace

void finalize_rule(Rule& rule) {
    require(rule.corners == 3 || rule.corners == 4, "fsr rule: polygon must be a triangle or a square");
    require(rule.children >= 2, "fsr rule: at least two children required");
    require(static_cast<int>(rule.weights.size()) == rule.children, "fsr rule: child count mismatch");
    require(rule.denom >= 1, "fsr rule: bad denominator");
    const auto k = static_cast<size_t>(rule.corners);
    __int128 total = 0;
    rule.image_face.assign(static_cast<size_t>(rule.children), 0);
    for (size_t i = 0; i < rule.weights.size(); ++i) {
        const auto& w = rule.weights[i];
        require(w.size() == k, "fsr rule: child " + std::to_string(i) + " needs one vertex per color");
        for (const auto& row : w) {
            require(row.size() == k, "fsr rule: weight rows need one entry per parent color");
            int64_t s = 0;
            for (auto x : row) {
                require(x >= 0, "fsr rule: weights must be nonnegative");
                s += x;
            }
            require(s == rule.denom, "fsr rule: weights of a vertex must sum to 1");
        }
        if (k == 4) {
            auto p0 = weighted_point(w, 0, 4), p1 = weighted_point(w, 1, 4);
            auto p2 = weighted_point(w, 2, 4), p3 = weighted_point(w, 3, 4);
            require(p0[0] + p2[0] == p1[0] + p3[0] && p0[1] + p2[1] == p1[1] + p3[1],
                    "fsr rule: square child is not an affine image");
        }
        __int128 a = signed_area2(w, rule.corners);
        require(a != 0, "fsr rule: degenerate child " + std::to_string(i));
        rule.image_face[i] = a > 0 ? 0 : 1;
        total += a > 0 ? a : -a;
    }
    // parent area in the same units (denominator squared)
    __int128 parent = static_cast<__int128>(rule.denom) * rule.denom * (rule.corners == 3 ? 1 : 2);
    require(total == parent, "fsr rule: children do not tile the polygon");
    int front = static_cast<int>(std::count(rule.image_face.begin(), rule.image_face.end(), 0));
    require(2 * front == rule.children, "fsr rule: children must split evenly between the two faces");
}

Rule barycentric_rule() {
    Rule r;
    r.name = "barycentric";
    r.corners = 3;
    r.denom = 6;
    for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) {
            if (y == x) continue;
            Weights w(3, std::vector<int64_t>(3, 0));
            w[0][static_cast<size_t>(x)] = 3;  // color a: edge midpoint
            w[0][static_cast<size_t>(y)] = 3;
            w[1] = {2, 2, 2};                  // color b: centroid
            w[2][static_cast<size_t>(x)] = 6;  // color c: corner
            r.weights.push_back(w);
        }
    }
    r.children = static_cast<int>(r.weights.size());
    finalize_rule(r);
    return r;
}

Rule square_rule() {
    Rule r;
    r.name = "squaregrid";
    r.corners = 4;
    r.denom = 4;
    const int h[4] = {1, 0, 3, 2};
    const int v[4] = {3, 2, 1, 0};
    for (int x = 0; x < 4; ++x) {
        Weights w(4, std::vector<int64_t>(4, 0));
        w[0][static_cast<size_t>(x)] = 4;
        w[1][static_cast<size_t>(x)] = 2;
        w[1][static_cast<size_t>(h[x])] = 2;
        w[2] = {1, 1, 1, 1};
        w[3][static_cast<size_t>(x)] = 2;
        w[3][static_cast<size_t>(v[x])] = 2;
        r.weights.push_back(w);
    }
    r.children = 4;
    finalize_rule(r);
    return r;
}

Rule rule_from_json(const Json& j) {
    require(j.is_object(), "fsr rule: expected a JSON object");
    Rule r;
    r.name = j.value("name", std::string("fsr"));
    require(j.contains("polygon") && j["polygon"].is_string(), "fsr rule: missing \"polygon\"");
    auto poly = j["polygon"].get<std::string>();
    if (poly == "triangle")
        r.corners = 3;
    else if (poly == "square")
        r.corners = 4;
    else
        fail(ErrorKind::Validation, "fsr rule: unknown polygon '" + poly + "'");
    require(j.contains("children") && j["children"].is_array(), "fsr rule: missing \"children\"");
    std::vector<std::vector<std::vector<Rational>>> raw;
    int64_t den = 1;
    for (const auto& child : j["children"]) {
        const Json& verts = child.is_object() ? child.at("vertices") : child;
        require(verts.is_array(), "fsr rule: child vertices must be an array");
        std::vector<std::vector<Rational>> cw;
        for (const auto& row : verts) {
            require(row.is_array(), "fsr rule: vertex weights must be an array");
            std::vector<Rational> rw;
            for (const auto& x : row) {
                Rational q = x.is_string() ? Rational::parse(x.get<std::string>())
                                           : (x.is_number_integer() ? Rational(x.get<int64_t>())
                                                                    : (fail(ErrorKind::Validation,
                                                                            "fsr rule: weights must be rationals"),
                                                                       Rational()));
                den = std::lcm(den, q.den());
                rw.push_back(q);
            }
            cw.push_back(rw);
        }
        raw.push_back(cw);
    }
    r.denom = den;
    for (const auto& cw : raw) {
        Weights w;
        for (const auto& rw : cw) {
            std::vector<int64_t> iw;
            for (const auto& q : rw) iw.push_back((q * Rational(den)).num());
            w.push_back(iw);
        }
        r.weights.push_back(w);
    }
    r.children = static_cast<int>(r.weights.size());
    finalize_rule(r);
    return r;
}

Json rule_to_json(const Rule& rule) {
    Json children = Json::array();
    for (const auto& w : rule.weights) {
        Json verts = Json::array();
        for (const auto& row : w) {
            Json jr = Json::array();
            for (auto x : row) jr.push_back(Rational(x, rule.denom).str());
            verts.push_back(jr);
        }
        children.push_back(Json{{"vertices", verts}});
    }
    return Json{{"name", rule.name},
                {"polygon", rule.corners == 3 ? "triangle" : "square"},
                {"children", children}};
}

Tiling::Tiling(const Rule& rule, int max_level) : rule_(rule), max_level_(max_level) {
    require(max_level >= 1, "tiling needs at least one level");
    require(!rule_.image_face.empty(), "fsr rule is not finalized");
    __int128 s = 1;
    for (int i = 0; i < max_level; ++i) {
        s *= rule_.denom;
        if (s > (static_cast<__int128>(1) << 30)) fail(ErrorKind::Budget, "tiling level too deep for exact coordinates");
    }
    scale_ = static_cast<int64_t>(s);
    uint64_t p = 1;
    for (int i = 0; i <= max_level; ++i) {
        pow_.push_back(p);
        if (i < max_level) {
            p *= static_cast<uint64_t>(rule_.children);
            if (2 * p > 0xFFFFFFFFull) fail(ErrorKind::Budget, "tiling level too deep for 32-bit tile ids");
        }
    }
    for (const auto& c : frame_corners(rule_.corners)) {
        Point pt{0, c[0] * scale_, c[1] * scale_};
        corner_pos_.push_back(embed(pt));
    }
    levels_.resize(static_cast<size_t>(max_level) + 1);
    auto& l0 = levels_[0];
    for (int c = 0; c < rule_.corners; ++c) {
        auto fc = frame_corners(rule_.corners)[static_cast<size_t>(c)];
        Point pt{0, fc[0] * scale_, fc[1] * scale_};
        l0.index.emplace(key(pt), static_cast<uint32_t>(c));
        l0.points.push_back(pt);
        l0.colors.push_back(c);
    }
    for (int face = 0; face < 2; ++face)
        for (int c = 0; c < rule_.corners; ++c) l0.tile_vertices.push_back(static_cast<uint32_t>(c));
    finish_level(0);
    for (int level = 1; level <= max_level; ++level) build_level(level);
    compute_postcritical();
}

uint64_t Tiling::key(const Point& p) const {
    auto s = static_cast<uint64_t>(scale_) + 1;
    return (static_cast<uint64_t>(p.face) * s + static_cast<uint64_t>(p.x)) * s + static_cast<uint64_t>(p.y);
}

bool Tiling::on_seam(const Point& p) const {
    if (p.x == 0 || p.y == 0) return true;
    if (rule_.corners == 3) return p.x + p.y == scale_;
    return p.x == scale_ || p.y == scale_;
}

Point Tiling::canonical(Point p) const {
    if (on_seam(p)) p.face = 0;
    return p;
}

void Tiling::build_level(int level) {
    const auto& prev = levels_[static_cast<size_t>(level) - 1];
    auto& cur = levels_[static_cast<size_t>(level)];
    const auto k = static_cast<size_t>(rule_.corners);
    const auto m = static_cast<uint32_t>(rule_.children);
    const uint32_t count = tile_count(level - 1);
    cur.tile_vertices.reserve(static_cast<size_t>(count) * m * k);
    for (uint32_t t = 0; t < count; ++t) {
        int face = tile_face(level - 1, t);
        const uint32_t* pv = &prev.tile_vertices[t * k];
        for (uint32_t i = 0; i < m; ++i) {
            const auto& w = rule_.weights[i];
            for (size_t j = 0; j < k; ++j) {
                __int128 x = 0, y = 0;
                for (size_t c = 0; c < k; ++c) {
                    x += static_cast<__int128>(w[j][c]) * prev.points[pv[c]].x;
                    y += static_cast<__int128>(w[j][c]) * prev.points[pv[c]].y;
                }
                if (x % rule_.denom != 0 || y % rule_.denom != 0)
                    fail(ErrorKind::Internal, "inexact tiling coordinate");
                Point pt = canonical(Point{face, static_cast<int64_t>(x / rule_.denom),
                                           static_cast<int64_t>(y / rule_.denom)});
                auto [it, inserted] = cur.index.emplace(key(pt), static_cast<uint32_t>(cur.points.size()));
                if (inserted) {
                    cur.points.push_back(pt);
                    cur.colors.push_back(static_cast<int>(j));
                } else if (cur.colors[it->second] != static_cast<int>(j)) {
                    fail(ErrorKind::Validation, "fsr rule: inconsistent vertex colors at level " + std::to_string(level));
                }
                cur.tile_vertices.push_back(it->second);
            }
        }
    }
    finish_level(level);
}

void Tiling::finish_level(int level) {
    auto& cur = levels_[static_cast<size_t>(level)];
    const auto k = static_cast<size_t>(rule_.corners);
    const uint32_t count = tile_count(level);
    // vertex -> tile incidence (CSR)
    cur.incidence_offsets.assign(cur.points.size() + 1, 0);
    for (auto v : cur.tile_vertices) ++cur.incidence_offsets[v + 1];
    for (size_t i = 1; i < cur.incidence_offsets.size(); ++i) cur.incidence_offsets[i] += cur.incidence_offsets[i - 1];
    cur.incidence.assign(cur.tile_vertices.size(), 0);
    std::vector<uint32_t> fill(cur.incidence_offsets.begin(), cur.incidence_offsets.end() - 1);
    for (uint32_t t = 0; t < count; ++t)
        for (size_t j = 0; j < k; ++j) cur.incidence[fill[cur.tile_vertices[t * k + j]]++] = t;
    // edge pairing
    struct EdgeRef {
        uint64_t key;
        uint32_t tile;
        uint32_t slot;
    };
    std::vector<EdgeRef> edges;
    edges.reserve(static_cast<size_t>(count) * k);
    for (uint32_t t = 0; t < count; ++t) {
        for (size_t j = 0; j < k; ++j) {
            uint64_t a = cur.tile_vertices[t * k + j];
            uint64_t b = cur.tile_vertices[t * k + (j + 1) % k];
            if (a > b) std::swap(a, b);
            edges.push_back({(a << 32) | b, t, static_cast<uint32_t>(j)});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const EdgeRef& x, const EdgeRef& y) {
        return x.key != y.key ? x.key < y.key : x.tile < y.tile;
    });
    cur.neighbors.assign(static_cast<size_t>(count) * k, UINT32_MAX);
    for (size_t i = 0; i < edges.size();) {
        size_t j = i;
        while (j < edges.size() && edges[j].key == edges[i].key) ++j;
        if (j - i != 2) fail(ErrorKind::Validation, "fsr rule: subdivision is not a closed surface at level " + std::to_string(level));
        cur.neighbors[edges[i].tile * k + edges[i].slot] = edges[i + 1].tile;
        cur.neighbors[edges[i + 1].tile * k + edges[i + 1].slot] = edges[i].tile;
        i = j;
    }
    size_t v = cur.points.size();
    size_t e = edges.size() / 2;
    if (static_cast<int64_t>(v) - static_cast<int64_t>(e) + count != 2)
        fail(ErrorKind::Validation, "fsr rule: subdivision is not a sphere at level " + std::to_string(level));
}

uint32_t Tiling::tile_image(int level, uint32_t t) const {
    uint32_t b = block(level - 1);
    uint32_t top = t / b;  // level-1 ancestor index: face*m + k1
    auto m = static_cast<uint32_t>(rule_.children);
    uint32_t face = top / m;
    uint32_t child = top % m;
    auto img = static_cast<uint32_t>(rule_.image_face[child]);
    if (face == 1) img = 1 - img;
    return img * b + t % b;
}

std::vector<uint32_t> Tiling::tile_preimages(int level, uint32_t t) const {
    uint32_t b = block(level);
    uint32_t face = t / b;
    uint32_t rest = t % b;
    auto m = static_cast<uint32_t>(rule_.children);
    std::vector<uint32_t> out;
    for (uint32_t f0 = 0; f0 < 2; ++f0) {
        for (uint32_t c = 0; c < m; ++c) {
            auto img = static_cast<uint32_t>(rule_.image_face[c]);
            if (f0 == 1) img = 1 - img;
            if (img == face) out.push_back((f0 * m + c) * b + rest);
        }
    }
    return out;
}

const uint32_t* Tiling::tile_vertices(int level, uint32_t t) const {
    return &levels_[static_cast<size_t>(level)].tile_vertices[static_cast<size_t>(t) * static_cast<size_t>(rule_.corners)];
}

const uint32_t* Tiling::tile_neighbors(int level, uint32_t t) const {
    return &levels_[static_cast<size_t>(level)].neighbors[static_cast<size_t>(t) * static_cast<size_t>(rule_.corners)];
}

std::vector<uint32_t> Tiling::vertex_tiles(int level, uint32_t v) const {
    const auto& l = levels_[static_cast<size_t>(level)];
    return {l.incidence.begin() + l.incidence_offsets[v], l.incidence.begin() + l.incidence_offsets[v + 1]};
}

std::optional<uint32_t> Tiling::find_vertex(int level, const Point& p) const {
    const auto& l = levels_[static_cast<size_t>(level)];
    auto it = l.index.find(key(canonical(p)));
    if (it == l.index.end()) return std::nullopt;
    return it->second;
}

uint32_t Tiling::vertex_image(int level, uint32_t v) const {
    const auto& l = levels_[static_cast<size_t>(level)];
    uint32_t t = l.incidence[l.incidence_offsets[v]];
    return tile_vertices(level - 1, tile_image(level, t))[l.colors[v]];
}

int Tiling::local_degree(int level, uint32_t v) const {
    const auto& l = levels_[static_cast<size_t>(level)];
    const auto& p = levels_[static_cast<size_t>(level) - 1];
    uint32_t w = vertex_image(level, v);
    auto here = l.incidence_offsets[v + 1] - l.incidence_offsets[v];
    auto there = p.incidence_offsets[w + 1] - p.incidence_offsets[w];
    return static_cast<int>(here / there);
}

void Tiling::compute_postcritical() {
    std::vector<uint32_t> frontier;
    for (uint32_t v = 0; v < vertex_count(1); ++v)
        if (local_degree(1, v) > 1) frontier.push_back(vertex_image(1, v));
    std::vector<bool> seen(vertex_count(0), false);
    while (!frontier.empty()) {
        uint32_t u = frontier.back();
        frontier.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        auto at1 = find_vertex(1, vertex_point(0, u));
        frontier.push_back(vertex_image(1, *at1));
    }
    for (uint32_t u = 0; u < seen.size(); ++u)
        if (seen[u]) postcritical_.push_back(u);
}

std::array<double, 2> Tiling::embed(const Point& p) const {
    double x = static_cast<double>(p.x) / static_cast<double>(scale_);
    double y = static_cast<double>(p.y) / static_cast<double>(scale_);
    if (rule_.corners == 3) return {x + 0.5 * y, y * std::sqrt(3.0) / 2.0};
    return {x, y};
}

double Tiling::path_distance(const Point& a, const Point& b) const {
    auto pa = embed(a);
    auto pb = embed(b);
    auto dist = [](const std::array<double, 2>& u, const std::array<double, 2>& v) {
        return std::hypot(u[0] - v[0], u[1] - v[1]);
    };
    if (a.face == b.face || on_seam(a) || on_seam(b)) return dist(pa, pb);
    double best = std::numeric_limits<double>::infinity();
    const size_t k = corner_pos_.size();
    for (size_t e = 0; e < k; ++e) {
        const auto& c0 = corner_pos_[e];
        const auto& c1 = corner_pos_[(e + 1) % k];
        // reflect b across the edge line, then clamp the crossing point to the edge
        double dx = c1[0] - c0[0], dy = c1[1] - c0[1];
        double len2 = dx * dx + dy * dy;
        double t = ((pb[0] - c0[0]) * dx + (pb[1] - c0[1]) * dy) / len2;
        std::array<double, 2> foot{c0[0] + t * dx, c0[1] + t * dy};
        std::array<double, 2> refl{2 * foot[0] - pb[0], 2 * foot[1] - pb[1]};
        // crossing parameter of segment a -> refl with the edge line
        double ex = refl[0] - pa[0], ey = refl[1] - pa[1];
        double den = ex * dy - ey * dx;
        double s;
        if (std::abs(den) < 1e-15) {
            s = ((pa[0] - c0[0]) * dx + (pa[1] - c0[1]) * dy) / len2;
        } else {
            s = ((pa[0] - c0[0]) * ey - (pa[1] - c0[1]) * ex) / (dx * ey - dy * ex);
        }
        s = std::clamp(s, 0.0, 1.0);
        std::array<double, 2> q{c0[0] + s * dx, c0[1] + s * dy};
        best = std::min(best, dist(pa, q) + dist(q, pb));
    }
    return best;
}

std::vector<uint32_t> star(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles) {
    std::vector<uint32_t> out;
    const int k = tiling.corners();
    for (auto t : tiles) {
        const uint32_t* vs = tiling.tile_vertices(level, t);
        for (int j = 0; j < k; ++j) {
            auto around = tiling.vertex_tiles(level, vs[j]);
            out.insert(out.end(), around.begin(), around.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<uint32_t> refine(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles, int k) {
    if (k == 0) return tiles;
    uint32_t b = tiling.block(k);
    (void)level;
    std::vector<uint32_t> out;
    out.reserve(tiles.size() * b);
    for (auto t : tiles)
        for (uint32_t i = 0; i < b; ++i) out.push_back(t * b + i);
    return out;
}

std::vector<uint32_t> interior_vertices(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles) {
    std::vector<uint32_t> verts;
    const int k = tiling.corners();
    for (auto t : tiles) {
        const uint32_t* vs = tiling.tile_vertices(level, t);
        verts.insert(verts.end(), vs, vs + k);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    std::vector<uint32_t> out;
    for (auto v : verts) {
        auto around = tiling.vertex_tiles(level, v);
        bool all = std::all_of(around.begin(), around.end(),
                               [&](uint32_t t) { return std::binary_search(tiles.begin(), tiles.end(), t); });
        if (all) out.push_back(v);
    }
    return out;
}

bool is_closed_disk(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles) {
    if (tiles.empty()) return false;
    const int k = tiling.corners();
    auto in = [&](uint32_t t) { return std::binary_search(tiles.begin(), tiles.end(), t); };
    // edge connectivity of the tile set
    std::vector<uint32_t> stack{tiles.front()};
    std::vector<bool> seen(tiles.size(), false);
    seen[0] = true;
    size_t reached = 1;
    while (!stack.empty()) {
        uint32_t t = stack.back();
        stack.pop_back();
        const uint32_t* nb = tiling.tile_neighbors(level, t);
        for (int j = 0; j < k; ++j) {
            auto it = std::lower_bound(tiles.begin(), tiles.end(), nb[j]);
            if (it == tiles.end() || *it != nb[j]) continue;
            auto idx = static_cast<size_t>(it - tiles.begin());
            if (!seen[idx]) {
                seen[idx] = true;
                ++reached;
                stack.push_back(nb[j]);
            }
        }
    }
    if (reached != tiles.size()) return false;
    // Euler characteristic and boundary structure
    std::vector<uint64_t> edges;
    std::vector<uint32_t> verts;
    std::vector<std::pair<uint32_t, uint32_t>> boundary;
    for (auto t : tiles) {
        const uint32_t* vs = tiling.tile_vertices(level, t);
        const uint32_t* nb = tiling.tile_neighbors(level, t);
        for (int j = 0; j < k; ++j) {
            uint64_t a = vs[j], b = vs[(j + 1) % k];
            if (a > b) std::swap(a, b);
            edges.push_back((a << 32) | b);
            verts.push_back(vs[j]);
            if (!in(nb[j])) boundary.emplace_back(vs[j], vs[(j + 1) % k]);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    auto chi = static_cast<int64_t>(verts.size()) - static_cast<int64_t>(edges.size()) + static_cast<int64_t>(tiles.size());
    if (chi != 1) return false;
    std::unordered_map<uint32_t, int> bdeg;
    for (auto& [a, b] : boundary) {
        ++bdeg[a];
        ++bdeg[b];
    }
    for (auto& [v, d] : bdeg)
        if (d != 2) return false;
    // every vertex link inside the set must be a single fan
    for (auto v : verts) {
        auto around = tiling.vertex_tiles(level, v);
        std::vector<uint32_t> mine;
        for (auto t : around)
            if (in(t)) mine.push_back(t);
        std::vector<uint32_t> st{mine.front()};
        std::vector<uint32_t> got{mine.front()};
        while (!st.empty()) {
            uint32_t t = st.back();
            st.pop_back();
            const uint32_t* vs = tiling.tile_vertices(level, t);
            const uint32_t* nb = tiling.tile_neighbors(level, t);
            for (int j = 0; j < k; ++j) {
                if (vs[j] != v && vs[(j + 1) % k] != v) continue;
                uint32_t u = nb[j];
                if (!in(u) || std::find(got.begin(), got.end(), u) != got.end()) continue;
                got.push_back(u);
                st.push_back(u);
            }
        }
        if (got.size() != mine.size()) return false;
    }
    return true;
}

}  // namespace cxc::fsr
