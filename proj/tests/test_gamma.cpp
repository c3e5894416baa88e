#include "doctest.h"

#include "cxc/errors.hpp"
#include "cxc/gamma.hpp"
#include "oracles.hpp"

using namespace cxc;

namespace {

GammaGraph build(const std::string& src, int depth, bool brute = false) {
    GammaOptions o;
    o.depth = depth;
    o.brute_force_edges = brute;
    return GammaGraph::build(load_system(src), o);
}

uint32_t by_label(const GammaGraph& g, const std::string& label) {
    for (uint32_t v = 0; v < g.vertex_count(); ++v)
        if (g.label(v) == label) return v;
    FAIL("no vertex " << label);
    return 0;
}

/// Independent structural checks from the definitions.
void check_structure(const GammaGraph& g) {
    auto d = oracle::bfs(g, 0);
    const int deg = g.spec().degree;
    for (uint32_t v = 0; v < g.vertex_count(); ++v) {
        CHECK(d[v] == static_cast<int>(g.level(v)));
        auto nb = g.neighbors(v);
        for (size_t i = 0; i < nb.size(); ++i) {
            CHECK(nb[i] != v);
            if (i) CHECK(nb[i - 1] < nb[i]);
            int gap = static_cast<int>(g.level(v)) - static_cast<int>(g.level(nb[i]));
            CHECK(std::abs(gap) <= 1);
            // F is a graph map away from B(o, 1)
            if (g.level(v) >= 2 && g.level(nb[i]) >= 2) {
                uint32_t a = g.F(v), b = g.F(nb[i]);
                CHECK((a == b || g.adjacent(a, b)));
            }
        }
        if (v == 0) continue;
        CHECK(g.level(g.F(v)) == g.level(v) - 1);
        CHECK(g.vertex(v).degree == g.vertex(g.F(v)).degree * g.vertex(v).local_degree);
        if (static_cast<int>(g.level(v)) < g.depth()) {
            uint32_t sum = 0;
            for (auto [c, df] : g.preimages_of(v)) {
                CHECK(g.F(c) == v);
                sum += df;
            }
            CHECK(sum == static_cast<uint32_t>(deg));
        }
    }
    // vertex degrees of S(1) are 1
    for (uint32_t v = g.level_begin(1); v < g.level_end(1); ++v) CHECK(g.vertex(v).degree == 1);
}

}  // namespace

TEST_CASE("full shift builds a rooted tree without horizontal edges") {
    auto g = build("fullshift:d=2", 4);
    CHECK(g.edge_count() == g.vertex_count() - 1);
    for (uint32_t v = 0; v < g.vertex_count(); ++v)
        for (auto u : g.neighbors(v)) CHECK(g.level(u) != g.level(v));
    check_structure(g);
}

TEST_CASE("circle depth 3: |S(3)| = 16 and rotation invariant levels") {
    auto g = build("circle:d=2,arcs=4", 3);
    CHECK(g.sphere_size(3) == 16);
    for (int n = 1; n <= 3; ++n) {
        uint32_t b = g.level_begin(n), e = g.level_end(n);
        uint32_t size = e - b;
        // arc index by left endpoint
        std::vector<uint32_t> at(size);
        for (uint32_t v = b; v < e; ++v) {
            Rational k = g.cell(v).lo * Rational(size);
            REQUIRE(k.den() == 1);
            at[static_cast<size_t>(k.num())] = v;
        }
        for (uint32_t i = 0; i < size; ++i)
            for (uint32_t j = 0; j < size; ++j) {
                bool a = g.adjacent(at[i], at[j]);
                bool rotated = g.adjacent(at[(i + 1) % size], at[(j + 1) % size]);
                CHECK(a == rotated);
            }
        CHECK(g.adjacent(at[0], at[1]));
        CHECK(g.adjacent(at[0], at[size - 1]));
    }
    check_structure(g);
}

TEST_CASE("lifted edges equal the brute-force edge set") {
    for (const char* src : {"circle:d=2,arcs=4", "circle:d=3,arcs=3", "barycentric", "fullshift:d=3"}) {
        int depth = std::string(src) == "barycentric" ? 3 : 4;
        auto a = build(src, depth);
        auto b = build(src, depth, true);
        REQUIRE(a.vertex_count() == b.vertex_count());
        CHECK(a.edge_count() == b.edge_count());
        for (uint32_t v = 0; v < a.vertex_count(); ++v) {
            auto na = a.neighbors(v), nb = b.neighbors(v);
            CHECK(std::equal(na.begin(), na.end(), nb.begin(), nb.end()));
        }
    }
}

TEST_CASE("barycentric depth 3: degree doubles along the branch vertex") {
    // vertices over the fixed corner: d_F = 2 at every step of the F-chain
    auto g = build("barycentric", 3);
    std::vector<char> branch(g.vertex_count(), 0);
    for (uint32_t v = g.level_begin(1); v < g.level_end(1); ++v) branch[v] = 1;
    for (int n = 2; n <= 3; ++n) {
        size_t found = 0;
        uint64_t mx = 0;
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
            mx = std::max(mx, g.vertex(v).degree);
            if (g.vertex(v).local_degree == 2 && branch[g.F(v)]) {
                branch[v] = 1;
                ++found;
                CHECK(g.vertex(v).degree == (uint64_t{1} << (n - 1)));
            }
        }
        CHECK(found > 0);
        CHECK(mx >= (uint64_t{1} << (n - 1)));
    }
    check_structure(g);
}

TEST_CASE("F drops one level") {
    auto shift = build("fullshift:d=2", 4);
    CHECK(shift.F(0) == 0);
    uint32_t v = by_label(shift, "[011]");
    CHECK(shift.level(v) == 3);
    CHECK(shift.label(shift.F(v)) == "[11]");

    auto circle = build("circle:d=2,arcs=4", 4);
    auto w = circle.find(CellAddress{0, {1, 0}});
    REQUIRE(w);
    auto img = circle.vertex(circle.F(*w)).addr;
    CHECK(img == CellAddress{0, {1}});
}

TEST_CASE("preimages carry d_F summing to d") {
    auto shift = build("fullshift:d=2", 3);
    auto pre = shift.preimages_of(by_label(shift, "[0]"));
    REQUIRE(pre.size() == 2);
    CHECK(shift.label(pre[0].first) == "[00]");
    CHECK(shift.label(pre[1].first) == "[10]");
    CHECK(pre[0].second == 1);
    CHECK(pre[1].second == 1);

    auto bary = build("barycentric", 3);
    bool branched = false;
    for (uint32_t v = 1; v < bary.level_end(2); ++v) {
        uint32_t sum = 0;
        for (auto [c, df] : bary.preimages_of(v)) {
            sum += df;
            if (df == 2) branched = true;
        }
        CHECK(sum == 6);
    }
    CHECK(branched);
    CHECK_THROWS_AS(bary.preimages_of(bary.level_begin(3)), Error);
}

TEST_CASE("sphere sizes") {
    auto whole = build("fullshift:d=2,cover=whole", 4);
    CHECK(whole.sphere_size(3) == 4);
    auto circle = build("circle:d=2,arcs=4", 6);
    for (int n = 1; n <= 6; ++n) CHECK(circle.sphere_size(n) == 4u << (n - 1));

    auto bary = build("barycentric", 4);
    const uint64_t d = 6, s1 = bary.sphere_size(1);
    uint64_t dn = 1;
    for (int n = 1; n < 4; ++n) {
        dn *= d;
        uint64_t excess = 0;
        for (uint32_t v = bary.level_begin(n + 1); v < bary.level_end(n + 1); ++v) excess += bary.vertex(v).degree - 1;
        CHECK(bary.sphere_size(n + 1) == dn * s1 - excess);
        CHECK(bary.sphere_size(n + 1) <= d * bary.sphere_size(n));
    }
}

TEST_CASE("structural invariants on the builtins") {
    check_structure(build("circle:d=2,arcs=4", 7));
    check_structure(build("circle:d=3,arcs=5", 4));
    check_structure(build("barycentric", 4));
    check_structure(build("squaregrid", 3));
    auto g = build("circle:d=2,arcs=4", 6);
    CHECK(verify_graph(g).ok());
}

TEST_CASE("geometric and substitution encodings give isomorphic graphs") {
    auto geo = load_system("circle:d=2,arcs=4");
    auto sub = substitution_from_circle(*geo);
    GammaOptions o;
    o.depth = 5;
    auto a = GammaGraph::build(geo, o);
    auto b = GammaGraph::build(sub, o);
    std::string why;
    CHECK_MESSAGE(oracle::isomorphic_by_labels(a, b, &why), why);
}

TEST_CASE("budget and depth errors") {
    GammaOptions o;
    o.depth = 40;
    try {
        GammaGraph::build(load_system("circle:d=2,arcs=4"), o);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Budget);
    }
    o.depth = 0;
    CHECK_THROWS_AS(GammaGraph::build(load_system("circle:d=2,arcs=4"), o), Error);
}

TEST_CASE("exports list every vertex") {
    auto g = build("circle:d=2,arcs=4", 3);
    auto j = g.to_json();
    CHECK(j["schema"] == "v1");
    auto csv = g.to_csv();
    size_t lines = static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == g.vertex_count() + 1);
}
