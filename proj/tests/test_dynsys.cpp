#include "doctest.h"

#include "cxc/dynsys.hpp"
#include "cxc/errors.hpp"

#include <set>

using namespace cxc;

namespace {

CellAddress addr(uint32_t root, std::vector<uint8_t> word = {}) { return {root, std::move(word)}; }

std::string data(const std::string& rel) { return std::string(CXC_DATA_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("rational arithmetic stays normalized") {
    Rational a(6, -8);
    CHECK(a.num() == -3);
    CHECK(a.den() == 4);
    CHECK((a + Rational(3, 4)) == Rational(0));
    CHECK(Rational::parse("11/8").frac() == Rational(3, 8));
    CHECK(Rational(-1, 3).floor() == -1);
    CHECK(Rational(5, 16).str() == "5/16");
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("circle builtin has four overlapping arcs") {
    auto s = load_system("builtin:circle:d=2,arcs=4");
    CHECK(s->degree == 2);
    CHECK(s->backend == Backend::GeometricCircle);
    REQUIRE(s->elements.size() == 4);
    CHECK(s->elements[0].arc->first == Rational(0));
    CHECK(s->elements[0].arc->second == Rational(5, 8));
    for (size_t i = 0; i < 4; ++i) {
        size_t j = (i + 1) % 4;
        const auto& a = *s->elements[i].arc;
        const auto& b = *s->elements[j].arc;
        CHECK(arcs_overlap(a.first, a.second, b.first, b.second));
    }
}

TEST_CASE("barycentric builtin: degree 6 and 12 level-1 tiles") {
    auto s = load_system("barycentric");
    CHECK(s->degree == 6);
    CHECK(s->backend == Backend::Fsr);
    auto t = s->tiling(1);
    CHECK(t->tile_count(1) == 12);
}

TEST_CASE("rule with degree sum 5 for d = 6 is rejected") {
    try {
        load_system(data("systems/bad_degree.json"));
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("degree-sum") != std::string::npos);
    }
}

TEST_CASE("unknown descriptors and malformed parameters fail") {
    CHECK_THROWS_AS(load_system("builtin:torus"), Error);
    CHECK_THROWS_AS(load_system("circle:d=1"), Error);
    CHECK_THROWS_AS(load_system("circle:d=2,arcs=1"), Error);
    CHECK_THROWS_AS(load_system("circle:d=2,bogus=3"), Error);
}

TEST_CASE("circle preimages of (0, 5/8) are (0, 5/16) and (1/2, 13/16)") {
    auto s = load_system("circle:d=2,arcs=4");
    auto kids = preimage_components(*s, addr(0));
    REQUIRE(kids.size() == 2);
    auto c0 = s->cell_at(kids[0].first);
    auto c1 = s->cell_at(kids[1].first);
    CHECK(c0.lo == Rational(0));
    CHECK(c0.hi == Rational(5, 16));
    CHECK(c1.lo == Rational(1, 2));
    CHECK(c1.hi == Rational(13, 16));
    CHECK(kids[0].second == 1);
    CHECK(kids[1].second == 1);
}

TEST_CASE("circle preimages reproject onto the image arc") {
    auto s = load_system("circle:d=3,arcs=5");
    for (const auto& a : enumerate_level(*s, 3)) {
        auto parent = s->cell_at(a);
        uint32_t sum = 0;
        for (const auto& [child, deg] : preimage_components(*s, a)) {
            auto c = s->cell_at(child);
            sum += deg;
            CHECK((c.hi - c.lo) * Rational(3) == parent.hi - parent.lo);
            CHECK((c.lo * Rational(3)).frac() == parent.lo);
        }
        CHECK(sum == 3);
    }
}

TEST_CASE("barycentric preimages have total degree 6") {
    auto s = load_system("barycentric");
    for (const auto& a : enumerate_level(*s, 2)) {
        uint32_t sum = 0;
        for (const auto& [child, deg] : preimage_components(*s, a)) sum += deg;
        CHECK(sum == 6);
    }
}

TEST_CASE("full shift preimages of [0] are [00] and [10]") {
    auto s = load_system("fullshift:d=2");
    auto kids = preimage_components(*s, addr(0));
    REQUIRE(kids.size() == 2);
    CHECK(s->label(kids[0].first) == "[00]");
    CHECK(s->label(kids[1].first) == "[10]");
    CHECK(kids[0].second == 1);
    CHECK(kids[1].second == 1);
}

namespace {

bool overlap_oracle(const Rational& lo1, const Rational& hi1, const Rational& lo2, const Rational& hi2) {
    for (int k = -2; k <= 2; ++k)
        if (max(lo1, lo2 + Rational(k)) < min(hi1, hi2 + Rational(k))) return true;
    return false;
}

}  // namespace

TEST_CASE("intersection oracle examples") {
    CHECK(arcs_overlap(Rational(0), Rational(5, 16), Rational(1, 4), Rational(9, 16)));
    CHECK_FALSE(arcs_overlap(Rational(0), Rational(1, 4), Rational(1, 4), Rational(1, 2)));

    auto circle = load_system("circle:d=2,arcs=4");
    // (0, 5/16) at level 2 against A3 = (3/4, 11/8)
    CHECK(intersects(*circle, addr(0, {0}), addr(3)));
    CHECK(intersects(*circle, addr(3), addr(0, {0})));

    auto shift = load_system("fullshift:d=2");
    CHECK(shift->label(addr(1, {0})) == "[01]");
    CHECK(shift->label(addr(0, {1})) == "[10]");
    CHECK_FALSE(intersects(*shift, addr(1, {0}), addr(0, {1})));
}

TEST_CASE("circle intersections match exact interval arithmetic") {
    auto s = load_system("circle:d=2,arcs=4");
    std::vector<CellAddress> cells;
    for (int n = 1; n <= 4; ++n)
        for (auto& a : enumerate_level(*s, n)) cells.push_back(a);
    size_t checked = 0;
    for (const auto& a : cells)
        for (const auto& b : cells) {
            int gap = static_cast<int>(a.level()) - static_cast<int>(b.level());
            if (gap < -1 || gap > 1) continue;
            auto ca = s->cell_at(a), cb = s->cell_at(b);
            bool want = overlap_oracle(ca.lo, ca.hi, cb.lo, cb.hi);
            CHECK(intersects(*s, a, b) == want);
            ++checked;
        }
    CHECK(checked > 1000);
}

TEST_CASE("intersects is symmetric and reflexive") {
    for (const char* src : {"circle:d=2,arcs=4", "fullshift:d=3", "barycentric"}) {
        auto s = load_system(src);
        for (int n = 1; n <= 2; ++n) {
            auto lv = enumerate_level(*s, n);
            for (const auto& a : lv) {
                CHECK(intersects(*s, a, a));
                for (const auto& b : lv) CHECK(intersects(*s, a, b) == intersects(*s, b, a));
            }
        }
    }
}

TEST_CASE("substitution encoding agrees with the geometric circle to level 5") {
    auto geo = load_system("circle:d=2,arcs=4");
    auto sub = substitution_from_circle(*geo);
    CHECK(sub->backend == Backend::Substitution);
    for (int n = 1; n <= 4; ++n) {
        auto lo = enumerate_level(*geo, n);
        auto hi = enumerate_level(*geo, n + 1);
        REQUIRE(enumerate_level(*sub, n).size() == lo.size());
        for (const auto& a : lo) {
            for (const auto& b : lo) CHECK(intersects(*geo, a, b) == intersects(*sub, a, b));
            for (const auto& b : hi) CHECK(intersects(*geo, a, b) == intersects(*sub, a, b));
        }
    }
}

TEST_CASE("level enumeration counts and order") {
    auto s = load_system("circle:d=2,arcs=4");
    CHECK(enumerate_level(*s, 1).size() == 4);
    auto l3 = enumerate_level(*s, 3);
    CHECK(l3.size() == 16);
    CHECK(std::is_sorted(l3.begin(), l3.end()));
    CHECK(level_size_estimate(*s, 3) == 16);

    auto b = load_system("barycentric");
    auto b1 = enumerate_level(*b, 1);
    auto b2 = enumerate_level(*b, 2);
    // branched components are counted once: sum of local degrees is 6 |S(1)|
    uint64_t components = 0, degree_sum = 0;
    for (const auto& a : b1)
        for (const auto& [child, deg] : preimage_components(*b, a)) {
            ++components;
            degree_sum += deg;
        }
    CHECK(degree_sum == 6 * b1.size());
    CHECK(b2.size() == components);
}

TEST_CASE("enumeration checks the budget before building") {
    auto s = load_system("circle:d=2,arcs=4");
    try {
        enumerate_level(*s, 30, 1000);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Budget);
    }
}
