#pragma once

#include "cxc/dynsys.hpp"
#include "cxc/json_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cxc {

/// Shingles with their nerve (pairs of intersecting shingles).
struct Shingling {
    std::vector<std::string> ids;
    std::vector<std::vector<uint32_t>> nerve;  // sorted adjacency

    size_t size() const { return ids.size(); }
    /// Max number of shingles meeting one shingle (itself included).
    uint32_t overlap_bound() const;
    void add_edge(uint32_t a, uint32_t b);
};

struct AnnulusProblem {
    std::string name;
    Shingling shingles;
    std::vector<uint32_t> inner;
    std::vector<uint32_t> outer;
    std::vector<uint32_t> slit;  // optional inner -> outer nerve path

    /// Inner and outer boundary sets share a shingle.
    bool degenerate() const;
    Json to_json() const;
};

/// Checks ids, nerve symmetry, boundary sets and the slit.
void validate_problem(const AnnulusProblem& p);
AnnulusProblem problem_from_json(const Json& j, const std::string& origin);
AnnulusProblem load_problem(const std::string& source);

// Builtin instances, also reachable through load_problem("builtin:<name>").
AnnulusProblem path_problem(int k);
AnnulusProblem parallel_problem(int m, int k);
/// layers x sectors ring; shingle (l, i) meets (l, i +- 1) and (l +- 1, i + {-1, 0, 1}).
AnnulusProblem ring_problem(int layers, int sectors);
AnnulusProblem grid_minus_center_problem();
AnnulusProblem touching_problem();
AnnulusProblem disconnected_problem();

enum class Family { Transversal, Separating };
const char* family_name(Family f);
Family parse_family(const std::string& s);

/// A chain is the sorted set of distinct shingles it meets.
using Chain = std::vector<uint32_t>;

struct QpResult {
    std::vector<double> rho;
    std::vector<double> lambda;
    double objective = 0;
    int sweeps = 0;
    bool converged = false;
};

/// min sum rho^2 subject to sum_{s in c} rho(s) >= 1 for every constraint c.
QpResult solve_min_norm(const std::vector<Chain>& constraints, size_t dim, double tol = 1e-12,
                        int max_sweeps = 10000);

struct ChainWeight {
    double weight = 0;
    Chain chain;
};

/// Lightest transversal chain under node weights rho.
ChainWeight lightest_transversal(const AnnulusProblem& p, const std::vector<double>& rho);
/// Lightest separating set: minimum node cut between the boundary sets.
ChainWeight lightest_separating(const AnnulusProblem& p, const std::vector<double>& rho);
double chain_weight(const Chain& c, const std::vector<double>& rho);

struct ModulusOptions {
    double tol = 1e-6;
    int max_rounds = 10000;
    /// Constraints seeded before the first round.
    std::vector<Chain> extra_chains;
};

struct ModulusResult {
    Family family = Family::Transversal;
    /// A_rho / L_rho^2 for the returned rho (rho normalized so L_rho = 1).
    double mod = 0;
    /// Optimal area of the relaxation over the generated chains.
    double relaxed = 0;
    double min_chain = 0;
    std::vector<double> rho;
    std::vector<Chain> active;
    size_t constraints = 0;
    int rounds = 0;

    Json to_json(const AnnulusProblem& p) const;
};

ModulusResult modulus(const AnnulusProblem& p, Family family, const ModulusOptions& opt = {});

struct ModPair {
    double mod_inf = 0;
    double mod_sup = 0;
    ModulusResult transversal;
    ModulusResult separating;
    Json to_json(const AnnulusProblem& p) const;
};

ModPair mod_pair(const AnnulusProblem& p, const ModulusOptions& opt = {});

/// Annulus on an fsr tiling, fixed at a base level as three tile sets.
struct TileAnnulus {
    int base_level = 0;
    std::vector<uint32_t> region;
    std::vector<uint32_t> inner_disk;
    std::vector<uint32_t> outer_disk;
    std::string description;
};

/// Square rule: band between heights lo/4 and hi/4 on both faces, base level 2.
TileAnnulus band_annulus(const fsr::Tiling& t, int lo = 1, int hi = 3);
/// Ring of tiles around a level-0 vertex at the given base level.
TileAnnulus vertex_ring_annulus(const fsr::Tiling& t, int base_level, uint32_t vertex0);
/// Level-0 vertex fixed by f with the largest local degree at level 1.
uint32_t branch_vertex(const fsr::Tiling& t);

/// Tiles of level n refining the region, with the nerve of closed tiles.
AnnulusProblem annulus_at_level(const fsr::Tiling& t, const TileAnnulus& a, int n);

struct ScanEntry {
    int level = 0;
    size_t shingles = 0;
    double mod_inf = 0;
    double mod_sup = 0;
};

struct ScanReport {
    std::string annulus;
    std::vector<ScanEntry> entries;
    /// Geometric mean m and spread K with every modulus in [m/K, K m].
    double m = 0;
    double k = 1;
    /// max/min modulus ratio of consecutive levels.
    double max_step_ratio = 1;
    Json to_json() const;
};

ScanReport conformality_scan(const SystemSpec& spec, const TileAnnulus& a, int n1, int n2,
                             const ModulusOptions& opt = {});

}  // namespace cxc
