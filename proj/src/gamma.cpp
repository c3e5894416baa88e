#include "cxc/gamma.hpp"

#include "cxc/errors.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace cxc {

GammaGraph GammaGraph::build(SystemPtr spec, const GammaOptions& opts) {
    require(opts.depth >= 1, "build_graph: depth must be at least 1");
    require(spec != nullptr, "build_graph: no system");
    unsigned __int128 est = 1;
    for (int n = 1; n <= opts.depth; ++n) {
        est += level_size_estimate(*spec, n);
        if (est > opts.budget)
            fail(ErrorKind::Budget, "graph to depth " + std::to_string(opts.depth) + " may exceed the vertex budget of " +
                                        std::to_string(opts.budget) + " (reduce --depth or raise --budget-vertices)");
    }
    GammaGraph g;
    g.spec_ = spec;
    g.depth_ = opts.depth;
    const SystemSpec& s = *spec;

    g.vertices_.push_back(Vertex{});
    g.cells_.emplace_back();
    g.level_start_ = {0, 1};
    for (uint32_t r = 0; r < s.elements.size(); ++r) {
        Vertex v;
        v.addr.root = r;
        v.level = 1;
        g.vertices_.push_back(v);
        g.cells_.push_back(s.root_cell(r));
    }
    g.level_start_.push_back(static_cast<uint32_t>(g.vertices_.size()));
    for (int n = 1; n < opts.depth; ++n) {
        for (uint32_t p = g.level_begin(n); p < g.level_end(n); ++p) {
            auto ch = s.children(g.cells_[p]);
            g.vertices_[p].first_child = static_cast<uint32_t>(g.vertices_.size());
            g.vertices_[p].child_count = static_cast<uint32_t>(ch.size());
            for (auto& c : ch) {
                Vertex v;
                v.addr = c.cell.addr;
                v.level = static_cast<uint32_t>(n + 1);
                v.local_degree = c.local_degree;
                v.degree = g.vertices_[p].degree * c.local_degree;
                v.image = p;
                g.vertices_.push_back(std::move(v));
                g.cells_.push_back(std::move(c.cell));
            }
        }
        g.level_start_.push_back(static_cast<uint32_t>(g.vertices_.size()));
    }
    // S(1) maps to o like the basepoint
    for (uint32_t v = g.level_begin(1); v < g.level_end(1); ++v) g.vertices_[v].image = 0;

    std::vector<std::pair<uint32_t, uint32_t>> edges;
    auto test = [&](uint32_t a, uint32_t b) {
        if (s.intersects(g.cells_[a], g.cells_[b])) edges.emplace_back(a, b);
    };
    for (uint32_t v = g.level_begin(1); v < g.level_end(1); ++v) edges.emplace_back(0, v);
    // per-level lists so lifted candidates only look one level up
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> horiz(static_cast<size_t>(opts.depth) + 1),
        vert(static_cast<size_t>(opts.depth) + 1);
    for (int n = 1; n <= opts.depth; ++n) {
        size_t before = edges.size();
        uint32_t b = g.level_begin(n), e = g.level_end(n);
        if (opts.brute_force_edges || n == 1) {
            for (uint32_t x = b; x < e; ++x)
                for (uint32_t y = x + 1; y < e; ++y) test(x, y);
        } else {
            for (auto [x, y] : horiz[static_cast<size_t>(n) - 1]) {
                const auto& vx = g.vertices_[x];
                const auto& vy = g.vertices_[y];
                for (uint32_t i = 0; i < vx.child_count; ++i)
                    for (uint32_t j = 0; j < vy.child_count; ++j) {
                        uint32_t a = vx.first_child + i, c = vy.first_child + j;
                        test(std::min(a, c), std::max(a, c));
                    }
            }
        }
        horiz[static_cast<size_t>(n)].assign(edges.begin() + static_cast<std::ptrdiff_t>(before), edges.end());
        if (n == 1) continue;
        before = edges.size();
        uint32_t pb = g.level_begin(n - 1), pe = g.level_end(n - 1);
        if (opts.brute_force_edges || n == 2) {
            for (uint32_t x = b; x < e; ++x)
                for (uint32_t y = pb; y < pe; ++y) test(x, y);
        } else {
            for (auto [x, y] : vert[static_cast<size_t>(n) - 1]) {
                const auto& vx = g.vertices_[x];
                const auto& vy = g.vertices_[y];
                for (uint32_t i = 0; i < vx.child_count; ++i)
                    for (uint32_t j = 0; j < vy.child_count; ++j) test(vx.first_child + i, vy.first_child + j);
            }
        }
        vert[static_cast<size_t>(n)].assign(edges.begin() + static_cast<std::ptrdiff_t>(before), edges.end());
    }
    std::vector<uint32_t> deg(g.vertices_.size(), 0);
    for (auto [a, b] : edges) {
        ++deg[a];
        ++deg[b];
    }
    g.adj_start_.assign(g.vertices_.size() + 1, 0);
    for (size_t v = 0; v < deg.size(); ++v) g.adj_start_[v + 1] = g.adj_start_[v] + deg[v];
    g.adj_.assign(g.adj_start_.back(), 0);
    std::vector<uint64_t> pos(g.adj_start_.begin(), g.adj_start_.end() - 1);
    for (auto [a, b] : edges) {
        g.adj_[pos[a]++] = b;
        g.adj_[pos[b]++] = a;
    }
    for (size_t v = 0; v < deg.size(); ++v)
        std::sort(g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_start_[v]),
                  g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_start_[v + 1]));
    return g;
}

bool GammaGraph::adjacent(uint32_t u, uint32_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

uint64_t GammaGraph::sphere_size(int n) const {
    require(n >= 0 && n <= depth_, "sphere_size: level out of range");
    return level_end(n) - level_begin(n);
}

std::optional<uint32_t> GammaGraph::find(const CellAddress& addr) const {
    if (addr.root >= spec_->elements.size() || static_cast<int>(addr.level()) > depth_) return std::nullopt;
    uint32_t v = 1 + addr.root;
    for (auto l : addr.word) {
        if (l >= vertices_[v].child_count) return std::nullopt;
        v = vertices_[v].first_child + l;
    }
    return v;
}

std::string GammaGraph::label(uint32_t v) const {
    if (v == 0) return "o";
    return spec_->label(vertices_[v].addr);
}

std::vector<std::pair<uint32_t, uint32_t>> GammaGraph::preimages_of(uint32_t v) const {
    require(v != 0, "preimages_of: the basepoint has no preimage structure");
    if (static_cast<int>(vertices_[v].level) + 1 > depth_)
        fail(ErrorKind::Validation, "preimages_of: depth exceeded (vertex at level " + std::to_string(vertices_[v].level) +
                                        ", graph depth " + std::to_string(depth_) + ")");
    std::vector<std::pair<uint32_t, uint32_t>> out;
    const auto& x = vertices_[v];
    for (uint32_t i = 0; i < x.child_count; ++i) out.emplace_back(x.first_child + i, vertices_[x.first_child + i].local_degree);
    return out;
}

Json GammaGraph::to_json() const {
    Json j;
    j["schema"] = "v1";
    j["kind"] = "graph";
    j["system"] = spec_->describe();
    j["depth"] = depth_;
    Json sizes = Json::array();
    for (int n = 0; n <= depth_; ++n) sizes.push_back(sphere_size(n));
    j["sphere_sizes"] = sizes;
    j["edge_count"] = edge_count();
    Json vs = Json::array();
    for (uint32_t v = 0; v < vertices_.size(); ++v) {
        Json nb = Json::array();
        for (auto w : neighbors(v)) nb.push_back(w);
        vs.push_back(Json{{"id", v},
                          {"label", label(v)},
                          {"level", vertices_[v].level},
                          {"degree", vertices_[v].degree},
                          {"local_degree", vertices_[v].local_degree},
                          {"F", vertices_[v].image},
                          {"neighbors", nb}});
    }
    j["vertices"] = vs;
    return j;
}

std::string GammaGraph::to_csv() const {
    std::ostringstream os;
    os << "id,label,level,degree,local_degree,F,neighbors\n";
    for (uint32_t v = 0; v < vertices_.size(); ++v) {
        os << v << "," << label(v) << "," << vertices_[v].level << "," << vertices_[v].degree << ","
           << vertices_[v].local_degree << "," << vertices_[v].image << ",";
        bool first = true;
        for (auto w : neighbors(v)) {
            os << (first ? "" : " ") << w;
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

std::vector<int> bfs_distances(const GammaGraph& g, uint32_t source) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::deque<uint32_t> q{source};
    dist[source] = 0;
    while (!q.empty()) {
        uint32_t v = q.front();
        q.pop_front();
        for (auto w : g.neighbors(v))
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
    }
    return dist;
}

GraphChecks verify_graph(const GammaGraph& g) {
    GraphChecks c;
    auto dist = bfs_distances(g, 0);
    const auto d = static_cast<uint64_t>(g.spec().degree);
    for (uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (dist[v] != static_cast<int>(g.level(v))) ++c.sphere_violations;
        for (auto w : g.neighbors(v)) {
            if (w == v || (g.level(v) > g.level(w) + 1) || (g.level(w) > g.level(v) + 1)) ++c.level_gap_violations;
            if (w < v || g.level(v) == 0 || g.level(w) == 0) continue;
            uint32_t a = g.F(v), b = g.F(w);
            if (a != b && !g.adjacent(a, b)) ++c.graph_map_violations;
        }
        if (g.level(v) >= 1 && static_cast<int>(g.level(v)) <= g.depth() - 1) {
            uint64_t sum = 0;
            for (auto [ch, df] : g.preimages_of(v)) sum += df;
            ++c.fibers_checked;
            if (sum != d) ++c.fiber_violations;
        }
    }
    unsigned __int128 expected = g.sphere_size(1);
    for (int n = 1; n <= g.depth(); ++n) {
        unsigned __int128 sum = 0;
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) sum += g.vertex(v).degree;
        if (sum != expected) c.degree_identity = false;
        c.degree_identity_levels.push_back(std::to_string(static_cast<uint64_t>(sum)) + "/" +
                                           std::to_string(static_cast<uint64_t>(expected)));
        expected *= d;
    }
    return c;
}

Json GraphChecks::to_json() const {
    Json j;
    j["sphere_violations"] = sphere_violations;
    j["fiber_violations"] = fiber_violations;
    j["fibers_checked"] = fibers_checked;
    j["level_gap_violations"] = level_gap_violations;
    j["graph_map_violations"] = graph_map_violations;
    j["degree_identity"] = degree_identity;
    j["degree_sums"] = degree_identity_levels;
    j["ok"] = ok();
    return j;
}

}  // namespace cxc
