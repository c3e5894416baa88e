#pragma once

#include "cxc/gamma.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace cxc {

struct MetricParams {
    double epsilon = 0.25;
};

/// Length of the vertical edge between levels n and n+1.
double vertical_weight(uint32_t n, double eps);
/// Length of a horizontal edge inside level n.
double horizontal_weight(uint32_t n, double eps);
double edge_weight(const GammaGraph& g, uint32_t u, uint32_t v, const MetricParams& p);
/// (1 - e^{-eps n}) / eps
double norm_formula(uint32_t n, double eps);

/// Dijkstra from the sources; entries beyond `limit` stay infinite.
std::vector<double> eps_distances(const GammaGraph& g, const MetricParams& p, const std::vector<uint32_t>& sources,
                                  double limit = -1);
double dist_eps(const GammaGraph& g, const MetricParams& p, uint32_t u, uint32_t v);
/// Gromov product at o in the unit metric.
double gromov_product(const GammaGraph& g, uint32_t u, uint32_t v);

enum class DeltaMode { Exhaustive, Sampled };

struct DeltaReport {
    double delta = 0;
    DeltaMode mode = DeltaMode::Exhaustive;
    uint64_t triples = 0;
    uint64_t seed = 0;
    std::array<uint32_t, 3> witness{0, 0, 0};
    Json to_json(const GammaGraph& g) const;
};

DeltaReport hyperbolicity_delta(const GammaGraph& g, DeltaMode mode, uint64_t seed = 0, uint64_t count = 100000,
                                size_t cap = 1024);

struct ShadowSet {
    uint32_t base = 0;
    int radius = 1;
    std::vector<std::vector<uint32_t>> members;  // indexed by level, sorted
    const std::vector<uint32_t>& at_level(int n) const& { return members[static_cast<size_t>(n)]; }
    std::vector<uint32_t> at_level(int n) && { return std::move(members[static_cast<size_t>(n)]); }
    bool contains(const GammaGraph& g, uint32_t v) const;
};

ShadowSet shadow(const GammaGraph& g, uint32_t w, int radius = 1);
double set_diameter(const GammaGraph& g, const MetricParams& p, const std::vector<uint32_t>& set);

struct ShadowConstants {
    std::vector<int> levels;
    std::vector<double> c_r;  // max over W at that level of diam(shadow) e^{eps |W|}
    double max_c = 0;
    Json to_json() const;
};
/// Diameters use shadow members down to the graph depth.
ShadowConstants shadow_constants(const GammaGraph& g, const MetricParams& p, int lo, int hi);

struct BoundaryAddress {
    std::vector<uint32_t> chain;  // vertex ids for levels 1..N
};

/// Chain of arcs containing x (geometric circle only).
BoundaryAddress address_of(const GammaGraph& g, const Rational& x, int choice = 0);
std::pair<double, double> boundary_distance(const GammaGraph& g, const MetricParams& p, const BoundaryAddress& a,
                                            const BoundaryAddress& b);
std::pair<double, double> dist_to_boundary(const GammaGraph& g, const MetricParams& p, uint32_t v);

struct BallViolation {
    double radius;
    uint32_t vertex;
    bool in_image;  // true: in F(B(xi, r e^-eps)) only
};

struct BallCheck {
    uint32_t xi = 0;
    std::vector<double> radii;
    std::vector<BallViolation> violations;
    uint64_t comparisons = 0;
};

/// r_j = r_max j / (count + 1) with r_max keeping both balls inside the truncation.
std::vector<double> default_radii(const GammaGraph& g, const MetricParams& p, uint32_t xi, int count = 10);
BallCheck ball_image_check(const GammaGraph& g, const MetricParams& p, uint32_t xi, const std::vector<double>& radii);

struct BallSummary {
    uint64_t vertices = 0;
    uint64_t comparisons = 0;
    uint64_t violations = 0;
    std::vector<BallCheck> failing;
    Json to_json(const GammaGraph& g) const;
};
BallSummary ball_check_all(const GammaGraph& g, const MetricParams& p, int radii_count = 10);

}  // namespace cxc
