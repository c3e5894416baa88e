#pragma once

#include "cxc/dynsys.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cxc {

struct Vertex {
    CellAddress addr;          // unused for the basepoint
    uint32_t level = 0;
    uint64_t degree = 1;       // d(W)
    uint32_t local_degree = 1; // d_F(W)
    uint32_t image = 0;        // F(W)
    uint32_t first_child = 0;
    uint32_t child_count = 0;
};

struct GammaOptions {
    int depth = 4;
    uint64_t budget = 2000000;
    /// Test every same-or-adjacent-level pair instead of lifting edges.
    bool brute_force_edges = false;
};

class GammaGraph {
public:
    static GammaGraph build(SystemPtr spec, const GammaOptions& opts);

    const SystemSpec& spec() const { return *spec_; }
    SystemPtr spec_ptr() const { return spec_; }
    int depth() const { return depth_; }
    size_t vertex_count() const { return vertices_.size(); }
    size_t edge_count() const { return adj_.size() / 2; }

    const Vertex& vertex(uint32_t v) const { return vertices_[v]; }
    uint32_t level(uint32_t v) const { return vertices_[v].level; }
    uint32_t F(uint32_t v) const { return vertices_[v].image; }
    std::span<const uint32_t> neighbors(uint32_t v) const {
        return {adj_.data() + adj_start_[v], adj_.data() + adj_start_[v + 1]};
    }
    bool adjacent(uint32_t u, uint32_t v) const;
    const Cell& cell(uint32_t v) const { return cells_[v]; }

    uint32_t level_begin(int n) const { return level_start_[static_cast<size_t>(n)]; }
    uint32_t level_end(int n) const { return level_start_[static_cast<size_t>(n) + 1]; }
    uint64_t sphere_size(int n) const;

    /// Vertex id for an address, if built.
    std::optional<uint32_t> find(const CellAddress& addr) const;
    std::string label(uint32_t v) const;

    /// Children under F with their d_F.
    std::vector<std::pair<uint32_t, uint32_t>> preimages_of(uint32_t v) const;

    Json to_json() const;
    std::string to_csv() const;

private:
    SystemPtr spec_;
    int depth_ = 0;
    std::vector<Vertex> vertices_;
    std::vector<Cell> cells_;
    std::vector<uint32_t> level_start_;
    std::vector<uint64_t> adj_start_;
    std::vector<uint32_t> adj_;
};

struct GraphChecks {
    uint64_t sphere_violations = 0;
    uint64_t fiber_violations = 0;
    uint64_t level_gap_violations = 0;
    uint64_t graph_map_violations = 0;
    bool degree_identity = true;
    std::vector<std::string> degree_identity_levels;  // "sum/expected" per level n+1
    uint64_t fibers_checked = 0;
    Json to_json() const;
    bool ok() const {
        return sphere_violations == 0 && fiber_violations == 0 && level_gap_violations == 0 &&
               graph_map_violations == 0 && degree_identity;
    }
};

GraphChecks verify_graph(const GammaGraph& g);

/// Unit-length BFS distances from a source.
std::vector<int> bfs_distances(const GammaGraph& g, uint32_t source);

}  // namespace cxc
