#pragma once

#include "cxc/fsr.hpp"
#include "cxc/json_io.hpp"
#include "cxc/rational.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cxc {

enum class Backend { GeometricCircle, Substitution, Fsr };

const char* backend_name(Backend b);

/// Level-0 element (cells reached from it carry its rule state).
struct CoverElement {
    std::string id;
    std::optional<std::pair<Rational, Rational>> arc;  // geometric-circle: canonical lo in [0,1)
    std::vector<uint32_t> tiles;                        // fsr: sorted tiles of the cover level
    std::vector<uint32_t> incident_tokens;
};

struct RuleComponent {
    uint32_t index = 0;
    uint32_t degree = 1;
    uint32_t state = 0;
};

/// Components of f^-1 of any cell in this state.
struct PreimageRule {
    std::string image_id;
    std::vector<RuleComponent> components;
};

/// Either a level-0 element (child < 0) or component `child` of its preimage.
struct CellRef {
    uint32_t root = 0;
    int32_t child = -1;
    bool operator==(const CellRef& o) const { return root == o.root && child == o.child; }
};

struct TokenLift {
    uint32_t first = 0;
    uint32_t second = 0;
    uint32_t multiplicity = 1;
    uint32_t next = 0;
};

struct ContactToken {
    std::string id;
    std::optional<std::pair<CellRef, CellRef>> pair;  // empty for lifted states
    std::vector<TokenLift> lifts;
};

struct CellAddress {
    uint32_t root = 0;
    std::vector<uint8_t> word;
    /// S-level of the vertex: 1 + word length.
    uint32_t level() const { return static_cast<uint32_t>(word.size()) + 1; }
    friend bool operator==(const CellAddress& a, const CellAddress& b) { return a.root == b.root && a.word == b.word; }
    friend bool operator<(const CellAddress& a, const CellAddress& b) {
        return a.root != b.root ? a.root < b.root : a.word < b.word;
    }
};

/// Element of some pullback cover with whatever geometry the backend keeps.
struct Cell {
    CellAddress addr;
    uint32_t state = 0;
    Rational lo, hi;  // geometric-circle arc (lo in [0,1), hi - lo < 1)
    int tile_level = 0;
    std::vector<uint32_t> tiles;  // fsr, sorted
};

struct ChildCell {
    Cell cell;
    uint32_t local_degree = 1;
};

class SystemSpec {
public:
    SystemSpec() = default;
    SystemSpec(const SystemSpec&) = delete;
    SystemSpec& operator=(const SystemSpec&) = delete;

    int degree = 2;
    Backend backend = Backend::Substitution;
    std::string family;      // circle | fullshift | fsr | substitution
    std::string descriptor;  // source string it was loaded from
    std::vector<CoverElement> elements;
    std::vector<PreimageRule> rules;  // indexed by state
    std::vector<uint32_t> element_state;
    std::vector<ContactToken> tokens;

    // fsr data
    std::shared_ptr<const fsr::Rule> rule;
    int n0 = 0;
    int n1 = 0;
    int cover_level() const { return n0 + n1; }
    /// Tiling covering at least the requested level (memoized, thread safe).
    std::shared_ptr<const fsr::Tiling> tiling(int level) const;

    bool cylinder_labels = false;

    // cell layer
    Cell root_cell(uint32_t root) const;
    Cell cell_at(const CellAddress& addr) const;
    std::vector<ChildCell> children(const Cell& c) const;
    bool intersects(const Cell& a, const Cell& b) const;
    bool is_geometric() const { return backend != Backend::Substitution; }
    /// outer contains inner (geometric backends).
    bool contains(const Cell& outer, const Cell& inner) const;
    /// Diameter in the circle metric or the doubled-polygon length metric.
    double diameter(const Cell& c) const;
    bool contains_point(const Cell& c, const Rational& x) const;

    std::string label(const CellAddress& addr) const;
    Json describe() const;
    /// Substitution-format JSON (geometric circle systems export their token automaton).
    Json to_json() const;

    uint32_t element_index(const std::string& id) const;

private:
    bool token_intersects(const CellAddress& deep, const CellAddress& shallow) const;
    mutable std::mutex tiling_mutex_;
    mutable std::shared_ptr<const fsr::Tiling> tiling_;
};

using SystemPtr = std::shared_ptr<const SystemSpec>;

/// Builtin descriptor ("circle:d=2,arcs=4", "fullshift:d=2", "barycentric",
/// "squaregrid", "fsr:<path>", optional "builtin:" prefix) or a JSON spec path.
SystemPtr load_system(const std::string& source);
SystemPtr system_from_json(const Json& j, const std::string& origin);
SystemPtr circle_system(int d, int arcs, std::optional<Rational> overlap);
SystemPtr fullshift_system(int d, bool whole_cover);
SystemPtr fsr_system(const fsr::Rule& rule, const std::string& descriptor);
/// Token-automaton encoding of a geometric circle system.
SystemPtr substitution_from_circle(const SystemSpec& circle);

/// Open-arc overlap on R/Z; arcs given by lo < hi with hi - lo < 1.
bool arcs_overlap(const Rational& lo1, const Rational& hi1, const Rational& lo2, const Rational& hi2);

std::vector<std::pair<CellAddress, uint32_t>> preimage_components(const SystemSpec& spec, const CellAddress& addr);
bool intersects(const SystemSpec& spec, const CellAddress& a, const CellAddress& b);
std::vector<CellAddress> enumerate_level(const SystemSpec& spec, int n, uint64_t budget = 2000000);
/// |S(1)| d^(n-1), saturating.
uint64_t level_size_estimate(const SystemSpec& spec, int n);

}  // namespace cxc
