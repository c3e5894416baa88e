#pragma once

#include "cxc/json_io.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cxc::fsr {

/// Colored affine subdivision of a doubled polygon (triangle or square).
/// Child i has one vertex per color j, placed at sum_c weights[i][j][c] * P_c / denom
/// where P_c is the parent's color-c vertex. The map f sends each child affinely
/// and color-preservingly onto the front or back face.
struct Rule {
    std::string name;
    int corners = 3;
    int children = 0;
    int64_t denom = 1;
    std::vector<std::vector<std::vector<int64_t>>> weights;
    /// Face hit by child i of the front face (0 front, 1 back). Derived.
    std::vector<int> image_face;
};

Rule barycentric_rule();
Rule square_rule();
Rule rule_from_json(const Json& j);
/// Checks shape, affinity (squares), orientation and fills image_face.
void finalize_rule(Rule& rule);
Json rule_to_json(const Rule& rule);

struct Point {
    int face = 0;
    int64_t x = 0;
    int64_t y = 0;
    bool operator==(const Point& o) const { return face == o.face && x == o.x && y == o.y; }
};

/// Tiles of level L are numbered face * m^L + sum_i k_i m^(L-i), so the
/// children of tile t are t*m + i and f(t) drops the first child letter.
class Tiling {
public:
    Tiling(const Rule& rule, int max_level);

    const Rule& rule() const { return rule_; }
    int max_level() const { return max_level_; }
    int corners() const { return rule_.corners; }
    uint32_t block(int level) const { return static_cast<uint32_t>(pow_[static_cast<size_t>(level)]); }
    uint32_t tile_count(int level) const { return 2 * block(level); }
    int tile_face(int level, uint32_t t) const { return static_cast<int>(t / block(level)); }

    /// f on tiles, level L -> L-1 (L >= 1).
    uint32_t tile_image(int level, uint32_t t) const;
    /// Tiles of level L+1 mapped onto tile t of level L.
    std::vector<uint32_t> tile_preimages(int level, uint32_t t) const;

    const uint32_t* tile_vertices(int level, uint32_t t) const;
    /// Neighbor across the edge from color j to color j+1 (mod corners).
    const uint32_t* tile_neighbors(int level, uint32_t t) const;

    size_t vertex_count(int level) const { return levels_[static_cast<size_t>(level)].points.size(); }
    const Point& vertex_point(int level, uint32_t v) const { return levels_[static_cast<size_t>(level)].points[v]; }
    int vertex_color(int level, uint32_t v) const { return levels_[static_cast<size_t>(level)].colors[v]; }
    bool vertex_on_seam(int level, uint32_t v) const { return on_seam(vertex_point(level, v)); }
    std::vector<uint32_t> vertex_tiles(int level, uint32_t v) const;
    std::optional<uint32_t> find_vertex(int level, const Point& p) const;

    /// Local degree of f at a vertex of level L >= 1.
    int local_degree(int level, uint32_t v) const;
    /// Image vertex (level L-1) of a vertex of level L >= 1.
    uint32_t vertex_image(int level, uint32_t v) const;

    /// Level-0 vertices (polygon corners) forming the postcritical set.
    const std::vector<uint32_t>& postcritical() const { return postcritical_; }

    std::array<double, 2> embed(const Point& p) const;
    /// Length metric of the doubled polygon (unit side), exact up to rounding.
    double path_distance(const Point& a, const Point& b) const;
    bool on_seam(const Point& p) const;
    int64_t scale() const { return scale_; }

private:
    struct Level {
        std::vector<uint32_t> tile_vertices;
        std::vector<uint32_t> neighbors;
        std::vector<Point> points;
        std::vector<int> colors;
        std::vector<uint32_t> incidence_offsets;
        std::vector<uint32_t> incidence;
        std::unordered_map<uint64_t, uint32_t> index;
    };

    uint64_t key(const Point& p) const;
    Point canonical(Point p) const;
    void build_level(int level);
    void finish_level(int level);
    void compute_postcritical();

    Rule rule_;
    int max_level_;
    int64_t scale_;
    std::vector<uint64_t> pow_;
    std::vector<Level> levels_;
    std::vector<uint32_t> postcritical_;
    std::vector<std::array<double, 2>> corner_pos_;
};

/// Combinatorial type of a tile set: a closed disk test for unions of closed tiles.
bool is_closed_disk(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles);
/// Vertices of the union that are interior (every incident tile belongs to the set).
std::vector<uint32_t> interior_vertices(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles);
/// Tiles of level L sharing at least one vertex with the given tile set of the same level.
std::vector<uint32_t> star(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles);
/// Refines a sorted tile set from level L to level L+k (sorted output).
std::vector<uint32_t> refine(const Tiling& tiling, int level, const std::vector<uint32_t>& tiles, int k);

}  // namespace cxc::fsr
