#include "cxc/dynsys.hpp"

#include "cxc/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cxc {

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::GeometricCircle: return "geometric-circle";
        case Backend::Substitution: return "substitution";
        case Backend::Fsr: return "fsr";
    }
    return "?";
}

bool arcs_overlap(const Rational& lo1, const Rational& hi1, const Rational& lo2, const Rational& hi2) {
    for (int64_t m = -2; m <= 2; ++m) {
        if (max(lo1, lo2 + Rational(m)) < min(hi1, hi2 + Rational(m))) return true;
    }
    return false;
}

namespace {

std::map<std::string, std::string> parse_params(const std::string& text, const std::string& whole) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Validation, "descriptor '" + whole + "': expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

int parse_positive(const std::map<std::string, std::string>& p, const std::string& key, int def, const std::string& whole) {
    auto it = p.find(key);
    if (it == p.end()) return def;
    try {
        size_t used = 0;
        int v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::Validation, "descriptor '" + whole + "': bad integer for " + key);
    }
}

void check_keys(const std::map<std::string, std::string>& p, std::initializer_list<const char*> allowed, const std::string& whole) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) fail(ErrorKind::Validation, "descriptor '" + whole + "': unknown parameter '" + k + "'");
    }
}

void check_arc_cover(const SystemSpec& s) {
    std::vector<Rational> cuts{Rational(0)};
    for (const auto& e : s.elements) {
        cuts.push_back(e.arc->first.frac());
        cuts.push_back(e.arc->second.frac());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto covered = [&](const Rational& x) {
        for (const auto& e : s.elements) {
            for (int64_t m = 0; m <= 1; ++m) {
                Rational y = x + Rational(m);
                if (e.arc->first < y && y < e.arc->second) return true;
            }
        }
        return false;
    };
    for (size_t i = 0; i < cuts.size(); ++i) {
        Rational next = i + 1 < cuts.size() ? cuts[i + 1] : Rational(1);
        Rational mid = (cuts[i] + next) / Rational(2);
        if (!covered(cuts[i]) || !covered(mid))
            fail(ErrorKind::Validation, "uncovered repellor: arcs miss the point " + (covered(cuts[i]) ? mid : cuts[i]).str());
    }
}

std::pair<Rational, Rational> canonical_arc(const Rational& lo, const Rational& hi, const std::string& id) {
    Rational len = hi - lo;
    if (!(Rational(0) < len && len < Rational(1)))
        fail(ErrorKind::Validation, "arc " + id + " must have length in (0,1), got " + len.str());
    Rational clo = lo.frac();
    return {clo, clo + len};
}

void add_uniform_rules(SystemSpec& s) {
    s.rules.clear();
    s.element_state.clear();
    for (uint32_t i = 0; i < s.elements.size(); ++i) {
        PreimageRule r;
        r.image_id = s.elements[i].id;
        for (int j = 0; j < s.degree; ++j) r.components.push_back({static_cast<uint32_t>(j), 1, i});
        s.rules.push_back(r);
        s.element_state.push_back(i);
    }
}

CellRef parse_ref(const std::string& text, const SystemSpec& s) {
    auto slash = text.find('/');
    CellRef r;
    r.root = s.element_index(text.substr(0, slash));
    if (slash != std::string::npos) {
        try {
            r.child = std::stoi(text.substr(slash + 1));
        } catch (const std::exception&) {
            fail(ErrorKind::Validation, "token cell reference '" + text + "' is malformed");
        }
        const auto& rule = s.rules[s.element_state[r.root]];
        if (r.child < 0 || static_cast<size_t>(r.child) >= rule.components.size())
            fail(ErrorKind::Validation, "token cell reference '" + text + "' names a missing component");
    }
    return r;
}

std::string ref_string(const CellRef& r, const SystemSpec& s) {
    std::string out = s.elements[r.root].id;
    if (r.child >= 0) out += "/" + std::to_string(r.child);
    return out;
}

uint32_t ref_state(const CellRef& r, const SystemSpec& s) {
    uint32_t st = s.element_state[r.root];
    if (r.child >= 0) st = s.rules[st].components[static_cast<size_t>(r.child)].state;
    return st;
}

void validate_tokens(const SystemSpec& s) {
    struct Triple {
        uint32_t token, a, b;
        bool operator<(const Triple& o) const {
            return std::tie(token, a, b) < std::tie(o.token, o.a, o.b);
        }
    };
    for (const auto& t : s.tokens) {
        uint64_t sum = 0;
        for (const auto& l : t.lifts) {
            require(l.multiplicity >= 1, "token " + t.id + ": multiplicities must be positive");
            sum += l.multiplicity;
        }
        if (sum != static_cast<uint64_t>(s.degree))
            fail(ErrorKind::Validation, "token " + t.id + ": lift multiplicities sum to " + std::to_string(sum) +
                                            " but the degree is " + std::to_string(s.degree));
    }
    std::set<Triple> seen;
    std::vector<Triple> todo;
    for (uint32_t i = 0; i < s.tokens.size(); ++i) {
        const auto& t = s.tokens[i];
        if (!t.pair) continue;
        auto [ra, rb] = *t.pair;
        int la = ra.child >= 0 ? 1 : 0, lb = rb.child >= 0 ? 1 : 0;
        require(la == lb || std::abs(la - lb) == 1, "token " + t.id + ": cells must be at adjacent levels");
        require(!(la == 1 && lb == 1), "token " + t.id + ": base tokens pair level-0 cells or a level-1 with a level-0 cell");
        todo.push_back({i, ref_state(ra, s), ref_state(rb, s)});
    }
    while (!todo.empty()) {
        Triple tr = todo.back();
        todo.pop_back();
        if (!seen.insert(tr).second) continue;
        const auto& t = s.tokens[tr.token];
        const auto& ca = s.rules[tr.a].components;
        const auto& cb = s.rules[tr.b].components;
        for (const auto& l : t.lifts) {
            if (l.first >= ca.size() || l.second >= cb.size())
                fail(ErrorKind::Validation, "token " + t.id + ": lift names a missing component");
            if (l.multiplicity > std::min(ca[l.first].degree, cb[l.second].degree))
                fail(ErrorKind::Validation, "token " + t.id + ": lift multiplicity exceeds a component degree");
            todo.push_back({l.next, ca[l.first].state, cb[l.second].state});
        }
    }
}

void index_tokens(SystemSpec& s) {
    for (auto& e : s.elements) e.incident_tokens.clear();
    for (uint32_t i = 0; i < s.tokens.size(); ++i) {
        if (!s.tokens[i].pair) continue;
        auto [a, b] = *s.tokens[i].pair;
        s.elements[a.root].incident_tokens.push_back(i);
        if (b.root != a.root) s.elements[b.root].incident_tokens.push_back(i);
    }
}

std::string rule_key_error(const std::string& id) { return "rule for '" + id + "'"; }

}  // namespace

uint32_t SystemSpec::element_index(const std::string& id) const {
    for (uint32_t i = 0; i < elements.size(); ++i)
        if (elements[i].id == id) return i;
    fail(ErrorKind::Validation, "unknown cover element '" + id + "'");
}

std::shared_ptr<const fsr::Tiling> SystemSpec::tiling(int level) const {
    std::lock_guard<std::mutex> lock(tiling_mutex_);
    if (!tiling_ || tiling_->max_level() < level) tiling_ = std::make_shared<const fsr::Tiling>(*rule, std::max(level, 1));
    return tiling_;
}

Cell SystemSpec::root_cell(uint32_t root) const {
    if (root >= elements.size()) fail(ErrorKind::Validation, "invalid address: root out of range");
    Cell c;
    c.addr.root = root;
    c.state = element_state.empty() ? 0 : element_state[root];
    switch (backend) {
        case Backend::GeometricCircle:
            c.lo = elements[root].arc->first;
            c.hi = elements[root].arc->second;
            break;
        case Backend::Fsr:
            c.tile_level = cover_level();
            c.tiles = elements[root].tiles;
            break;
        case Backend::Substitution:
            break;
    }
    return c;
}

std::vector<ChildCell> SystemSpec::children(const Cell& c) const {
    std::vector<ChildCell> out;
    switch (backend) {
        case Backend::GeometricCircle: {
            for (int j = 0; j < degree; ++j) {
                ChildCell ch;
                ch.cell.addr = c.addr;
                ch.cell.addr.word.push_back(static_cast<uint8_t>(j));
                ch.cell.state = c.state;
                ch.cell.lo = (c.lo + Rational(j)) / Rational(degree);
                ch.cell.hi = (c.hi + Rational(j)) / Rational(degree);
                out.push_back(std::move(ch));
            }
            break;
        }
        case Backend::Substitution: {
            for (const auto& comp : rules[c.state].components) {
                ChildCell ch;
                ch.cell.addr = c.addr;
                ch.cell.addr.word.push_back(static_cast<uint8_t>(comp.index));
                ch.cell.state = comp.state;
                ch.local_degree = comp.degree;
                out.push_back(std::move(ch));
            }
            break;
        }
        case Backend::Fsr: {
            int level = c.tile_level + 1;
            auto tl = tiling(level);
            std::vector<uint32_t> pre;
            for (auto t : c.tiles) {
                auto p = tl->tile_preimages(c.tile_level, t);
                pre.insert(pre.end(), p.begin(), p.end());
            }
            std::sort(pre.begin(), pre.end());
            std::vector<int> comp(pre.size(), -1);
            std::vector<std::vector<uint32_t>> comps;
            const int k = tl->corners();
            for (size_t i = 0; i < pre.size(); ++i) {
                if (comp[i] >= 0) continue;
                int id = static_cast<int>(comps.size());
                comps.emplace_back();
                std::vector<size_t> st{i};
                comp[i] = id;
                while (!st.empty()) {
                    size_t x = st.back();
                    st.pop_back();
                    comps.back().push_back(pre[x]);
                    const uint32_t* nb = tl->tile_neighbors(level, pre[x]);
                    for (int j = 0; j < k; ++j) {
                        auto it = std::lower_bound(pre.begin(), pre.end(), nb[j]);
                        if (it == pre.end() || *it != nb[j]) continue;
                        auto y = static_cast<size_t>(it - pre.begin());
                        if (comp[y] < 0) {
                            comp[y] = id;
                            st.push_back(y);
                        }
                    }
                }
                std::sort(comps.back().begin(), comps.back().end());
            }
            // components are discovered in order of their smallest tile
            for (size_t j = 0; j < comps.size(); ++j) {
                if (comps[j].size() % c.tiles.size() != 0) fail(ErrorKind::Internal, "preimage component is not a covering");
                ChildCell ch;
                ch.cell.addr = c.addr;
                ch.cell.addr.word.push_back(static_cast<uint8_t>(j));
                ch.cell.tile_level = level;
                ch.local_degree = static_cast<uint32_t>(comps[j].size() / c.tiles.size());
                ch.cell.tiles = std::move(comps[j]);
                out.push_back(std::move(ch));
            }
            break;
        }
    }
    return out;
}

Cell SystemSpec::cell_at(const CellAddress& addr) const {
    Cell c = root_cell(addr.root);
    for (auto letter : addr.word) {
        auto ch = children(c);
        if (letter >= ch.size()) fail(ErrorKind::Validation, "invalid address: letter out of range");
        c = std::move(ch[letter].cell);
    }
    return c;
}

bool SystemSpec::token_intersects(const CellAddress& deep, const CellAddress& shallow) const {
    // base reference pair then the remaining letters in lockstep
    CellRef a{deep.root, -1}, b{shallow.root, -1};
    size_t offset = 0;
    if (deep.level() == shallow.level() + 1) {
        a.child = deep.word[0];
        offset = 1;
    }
    for (uint32_t ti : elements[deep.root].incident_tokens) {
        const auto& t = tokens[ti];
        bool forward = t.pair->first == a && t.pair->second == b;
        bool backward = t.pair->first == b && t.pair->second == a;
        if (!forward && !backward) continue;
        std::vector<uint32_t> states{ti};
        for (size_t i = 0; i < shallow.word.size() && !states.empty(); ++i) {
            uint32_t x = deep.word[i + offset], y = shallow.word[i];
            if (backward) std::swap(x, y);
            std::vector<uint32_t> next;
            for (uint32_t s : states)
                for (const auto& l : tokens[s].lifts)
                    if (l.first == x && l.second == y) next.push_back(l.next);
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            states.swap(next);
        }
        if (!states.empty()) return true;
    }
    return false;
}

bool SystemSpec::intersects(const Cell& a, const Cell& b) const {
    uint32_t la = a.addr.level(), lb = b.addr.level();
    if (la > lb + 1 || lb > la + 1) fail(ErrorKind::Validation, "intersects: level gap greater than one");
    switch (backend) {
        case Backend::GeometricCircle:
            return arcs_overlap(a.lo, a.hi, b.lo, b.hi);
        case Backend::Substitution: {
            if (la == lb && a.addr.root == b.addr.root) return a.addr.word == b.addr.word;
            return la >= lb ? token_intersects(a.addr, b.addr) : token_intersects(b.addr, a.addr);
        }
        case Backend::Fsr: {
            const Cell& fine = a.tile_level >= b.tile_level ? a : b;
            const Cell& coarse = a.tile_level >= b.tile_level ? b : a;
            auto tl = tiling(fine.tile_level);
            auto up = fsr::refine(*tl, coarse.tile_level, coarse.tiles, fine.tile_level - coarse.tile_level);
            size_t i = 0, j = 0;
            while (i < up.size() && j < fine.tiles.size()) {
                if (up[i] == fine.tiles[j]) return true;
                if (up[i] < fine.tiles[j])
                    ++i;
                else
                    ++j;
            }
            return false;
        }
    }
    return false;
}

bool SystemSpec::contains(const Cell& outer, const Cell& inner) const {
    switch (backend) {
        case Backend::GeometricCircle:
            for (int64_t m = -2; m <= 2; ++m)
                if (outer.lo <= inner.lo + Rational(m) && inner.hi + Rational(m) <= outer.hi) return true;
            return false;
        case Backend::Fsr: {
            if (inner.tile_level < outer.tile_level) {
                auto tl = tiling(outer.tile_level);
                auto up = fsr::refine(*tl, inner.tile_level, inner.tiles, outer.tile_level - inner.tile_level);
                return std::includes(outer.tiles.begin(), outer.tiles.end(), up.begin(), up.end());
            }
            auto tl = tiling(inner.tile_level);
            auto up = fsr::refine(*tl, outer.tile_level, outer.tiles, inner.tile_level - outer.tile_level);
            return std::includes(up.begin(), up.end(), inner.tiles.begin(), inner.tiles.end());
        }
        case Backend::Substitution:
            fail(ErrorKind::Unsupported, "containment needs a geometric backend");
    }
    return false;
}

double SystemSpec::diameter(const Cell& c) const {
    switch (backend) {
        case Backend::GeometricCircle:
            return std::min((c.hi - c.lo).to_double(), 0.5);
        case Backend::Fsr: {
            auto tl = tiling(c.tile_level);
            std::vector<uint32_t> vs;
            for (auto t : c.tiles) {
                const uint32_t* v = tl->tile_vertices(c.tile_level, t);
                vs.insert(vs.end(), v, v + tl->corners());
            }
            std::sort(vs.begin(), vs.end());
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            double best = 0;
            for (size_t i = 0; i < vs.size(); ++i)
                for (size_t j = i + 1; j < vs.size(); ++j)
                    best = std::max(best, tl->path_distance(tl->vertex_point(c.tile_level, vs[i]),
                                                            tl->vertex_point(c.tile_level, vs[j])));
            return best;
        }
        case Backend::Substitution:
            fail(ErrorKind::Unsupported, "diameters need a geometric backend");
    }
    return 0;
}

bool SystemSpec::contains_point(const Cell& c, const Rational& x) const {
    if (backend != Backend::GeometricCircle) fail(ErrorKind::Unsupported, "point location needs the geometric-circle backend");
    Rational y = x.frac();
    for (int64_t m = 0; m <= 1; ++m)
        if (c.lo < y + Rational(m) && y + Rational(m) < c.hi) return true;
    return false;
}

std::string SystemSpec::label(const CellAddress& addr) const {
    if (cylinder_labels) {
        std::string s = "[";
        for (auto it = addr.word.rbegin(); it != addr.word.rend(); ++it) s += std::to_string(*it);
        if (elements[addr.root].id != "X") s += elements[addr.root].id;
        return s + "]";
    }
    std::string s = elements[addr.root].id;
    for (auto l : addr.word) s += "." + std::to_string(l);
    return s;
}

Json SystemSpec::describe() const {
    Json j;
    j["family"] = family;
    j["backend"] = backend_name(backend);
    j["degree"] = degree;
    j["cover_size"] = elements.size();
    if (backend == Backend::GeometricCircle) {
        Json arcs = Json::array();
        for (const auto& e : elements) arcs.push_back(Json{{"id", e.id}, {"arc", {e.arc->first.str(), e.arc->second.str()}}});
        j["elements"] = arcs;
    } else {
        Json ids = Json::array();
        for (const auto& e : elements) ids.push_back(e.id);
        j["elements"] = ids;
    }
    if (backend == Backend::Fsr) {
        j["rule"] = rule->name;
        j["star_parameters"] = {{"n0", n0}, {"n1", n1}};
        auto tl = tiling(std::max(cover_level(), 1));
        Json pc = Json::array();
        for (auto v : tl->postcritical()) pc.push_back(v);
        j["postcritical_corners"] = pc;
    }
    if (backend == Backend::Substitution) j["tokens"] = tokens.size();
    return j;
}

Json SystemSpec::to_json() const {
    Json j;
    j["degree"] = degree;
    j["backend"] = backend_name(backend);
    Json els = Json::array();
    for (const auto& e : elements) {
        Json je{{"id", e.id}};
        if (e.arc) je["arc"] = {e.arc->first.str(), e.arc->second.str()};
        els.push_back(je);
    }
    j["elements"] = els;
    Json rj = Json::object();
    for (const auto& r : rules) {
        Json comps = Json::array();
        for (const auto& c : r.components)
            comps.push_back(Json{{"index", c.index}, {"degree", c.degree}, {"state", rules[c.state].image_id}});
        rj[r.image_id] = comps;
    }
    j["rules"] = rj;
    Json tj = Json::array();
    for (const auto& t : tokens) {
        Json jt{{"id", t.id}};
        if (t.pair)
            jt["pair"] = {ref_string(t.pair->first, *this), ref_string(t.pair->second, *this)};
        else
            jt["pair"] = nullptr;
        Json lifts = Json::array();
        for (const auto& l : t.lifts)
            lifts.push_back(Json{{"first", l.first}, {"second", l.second}, {"multiplicity", l.multiplicity},
                                 {"next", tokens[l.next].id}});
        jt["lifts"] = lifts;
        tj.push_back(jt);
    }
    j["tokens"] = tj;
    return j;
}

SystemPtr circle_system(int d, int arcs, std::optional<Rational> overlap) {
    require(d >= 2, "circle system: degree must be at least 2");
    require(arcs >= 2, "uncovered repellor: a single open arc cannot cover the circle");
    require(d <= 255, "circle system: degree too large");
    auto s = std::make_shared<SystemSpec>();
    s->degree = d;
    s->backend = Backend::GeometricCircle;
    s->family = "circle";
    Rational ov = overlap ? *overlap : min(Rational(3, 2 * arcs), Rational(arcs - 1, 2 * arcs));
    require(Rational(0) < ov, "circle system: overlap must be positive");
    for (int i = 0; i < arcs; ++i) {
        CoverElement e;
        e.id = "A" + std::to_string(i);
        e.arc = canonical_arc(Rational(i, arcs), Rational(i + 1, arcs) + ov, e.id);
        s->elements.push_back(e);
    }
    check_arc_cover(*s);
    add_uniform_rules(*s);
    s->descriptor = "circle:d=" + std::to_string(d) + ",arcs=" + std::to_string(arcs) + ",overlap=" + ov.str();
    return s;
}

SystemPtr fullshift_system(int d, bool whole_cover) {
    require(d >= 2 && d <= 255, "full shift: degree must be in [2, 255]");
    auto s = std::make_shared<SystemSpec>();
    s->degree = d;
    s->backend = Backend::Substitution;
    s->family = "fullshift";
    s->cylinder_labels = true;
    if (whole_cover) {
        s->elements.push_back({"X", std::nullopt, {}, {}});
    } else {
        for (int i = 0; i < d; ++i) s->elements.push_back({std::to_string(i), std::nullopt, {}, {}});
    }
    add_uniform_rules(*s);
    // diag: contact point lifts letter by letter on both sides
    ContactToken diag;
    diag.id = "diag";
    for (int k = 0; k < d; ++k) diag.lifts.push_back({static_cast<uint32_t>(k), static_cast<uint32_t>(k), 1, 0});
    s->tokens.push_back(diag);
    for (uint32_t u = 0; u < s->elements.size(); ++u) {
        for (int i = 0; i < d; ++i) {
            ContactToken t;
            uint32_t target = whole_cover ? 0 : static_cast<uint32_t>(i);
            t.id = "v:" + s->elements[u].id + "/" + std::to_string(i);
            t.pair = std::make_pair(CellRef{u, i}, CellRef{target, -1});
            t.lifts = diag.lifts;
            s->tokens.push_back(t);
        }
    }
    validate_tokens(*s);
    index_tokens(*s);
    s->descriptor = "fullshift:d=" + std::to_string(d) + (whole_cover ? ",cover=whole" : "");
    return s;
}

SystemPtr fsr_system(const fsr::Rule& rule, const std::string& descriptor) {
    auto s = std::make_shared<SystemSpec>();
    s->degree = rule.children;
    s->backend = Backend::Fsr;
    s->family = "fsr";
    s->descriptor = descriptor;
    s->rule = std::make_shared<const fsr::Rule>(rule);
    const int max_total = 4;
    for (int n0 = 0; n0 <= max_total; ++n0) {
        for (int n1 = 0; n0 + n1 <= max_total; ++n1) {
            auto tl = s->tiling(std::max(n0 + n1, 1));
            int level = n0 + n1;
            std::vector<uint32_t> pc;
            for (auto v : tl->postcritical()) pc.push_back(*tl->find_vertex(level, tl->vertex_point(0, v)));
            std::vector<std::vector<uint32_t>> cover;
            bool ok = true;
            for (uint32_t t = 0; t < tl->tile_count(n0) && ok; ++t) {
                auto desc = fsr::refine(*tl, n0, {t}, n1);
                auto d = fsr::star(*tl, level, desc);
                if (!fsr::is_closed_disk(*tl, level, d)) {
                    ok = false;
                    break;
                }
                auto inner = fsr::interior_vertices(*tl, level, d);
                int hits = 0;
                for (auto p : pc) {
                    auto around = tl->vertex_tiles(level, p);
                    bool touches = std::any_of(around.begin(), around.end(),
                                               [&](uint32_t x) { return std::binary_search(d.begin(), d.end(), x); });
                    if (!touches) continue;
                    ++hits;
                    if (!std::binary_search(inner.begin(), inner.end(), p)) ok = false;
                }
                if (hits > 1) ok = false;
                cover.push_back(std::move(d));
            }
            if (!ok) continue;
            s->n0 = n0;
            s->n1 = n1;
            for (size_t i = 0; i < cover.size(); ++i) {
                CoverElement e;
                e.id = "U" + std::to_string(i);
                e.tiles = std::move(cover[i]);
                s->elements.push_back(std::move(e));
            }
            s->element_state.assign(s->elements.size(), 0);
            PreimageRule pr;
            pr.image_id = "cell";
            s->rules.push_back(pr);
            return s;
        }
    }
    fail(ErrorKind::Validation, "fsr rule: no star cover found with n0 + n1 <= " + std::to_string(max_total));
}

SystemPtr system_from_json(const Json& j, const std::string& origin) {
    require(j.is_object(), origin + ": system spec must be a JSON object");
    if (j.contains("polygon")) return fsr_system(fsr::rule_from_json(j), "fsr:" + origin);
    auto s = std::make_shared<SystemSpec>();
    s->descriptor = origin;
    require(j.contains("degree") && j["degree"].is_number_integer(), origin + ": missing integer \"degree\"");
    s->degree = j["degree"].get<int>();
    require(s->degree >= 2 && s->degree <= 255, origin + ": degree must be in [2, 255]");
    require(j.contains("elements") && j["elements"].is_array() && !j["elements"].empty(),
            origin + ": missing \"elements\"");
    bool any_arc = false, all_arc = true;
    std::set<std::string> ids;
    for (const auto& e : j["elements"]) {
        require(e.is_object() && e.contains("id") && e["id"].is_string(), origin + ": each element needs a string id");
        CoverElement ce;
        ce.id = e["id"].get<std::string>();
        require(!ce.id.empty() && ce.id.find('/') == std::string::npos, origin + ": element ids must be nonempty without '/'");
        require(ids.insert(ce.id).second, origin + ": duplicate element id '" + ce.id + "'");
        if (e.contains("arc")) {
            const auto& a = e["arc"];
            require(a.is_array() && a.size() == 2 && a[0].is_string() && a[1].is_string(),
                    origin + ": arc must be [\"p/q\", \"r/s\"]");
            ce.arc = canonical_arc(Rational::parse(a[0].get<std::string>()), Rational::parse(a[1].get<std::string>()), ce.id);
            any_arc = true;
        } else {
            all_arc = false;
        }
        s->elements.push_back(std::move(ce));
    }
    std::string backend = j.value("backend", std::string(all_arc ? "geometric-circle" : "substitution"));
    if (backend == "geometric-circle") {
        require(all_arc, origin + ": geometric-circle backend needs an arc on every element");
        s->backend = Backend::GeometricCircle;
        s->family = "circle";
        check_arc_cover(*s);
        add_uniform_rules(*s);
        if (j.contains("rules")) {
            for (const auto& [id, comps] : j["rules"].items()) {
                s->element_index(id);
                require(comps.is_array(), origin + ": " + rule_key_error(id) + " must be an array");
                uint64_t sum = 0;
                for (const auto& c : comps) {
                    require(c.value("degree", 1) == 1, origin + ": circle covering components have degree 1");
                    sum += 1;
                }
                if (sum != static_cast<uint64_t>(s->degree))
                    fail(ErrorKind::Validation, origin + ": degree-sum mismatch in " + rule_key_error(id));
            }
        }
        return s;
    }
    require(backend == "substitution", origin + ": unknown backend '" + backend + "'");
    require(!any_arc || true, "");
    s->backend = Backend::Substitution;
    s->family = "substitution";
    require(j.contains("rules") && j["rules"].is_object(), origin + ": missing \"rules\" object");
    const Json& rules = j["rules"];
    // states: elements first (in element order), then any extra rule keys in file order
    std::vector<std::string> state_ids;
    for (const auto& e : s->elements) {
        require(rules.contains(e.id), origin + ": element '" + e.id + "' has no rule");
        state_ids.push_back(e.id);
    }
    for (const auto& [id, comps] : rules.items())
        if (!ids.count(id)) state_ids.push_back(id);
    auto state_of = [&](const std::string& id) -> uint32_t {
        for (uint32_t i = 0; i < state_ids.size(); ++i)
            if (state_ids[i] == id) return i;
        fail(ErrorKind::Validation, origin + ": unknown rule state '" + id + "'");
    };
    for (uint32_t st = 0; st < state_ids.size(); ++st) {
        const auto& id = state_ids[st];
        const Json& comps = rules[id];
        require(comps.is_array() && !comps.empty(), origin + ": " + rule_key_error(id) + " must be a nonempty array");
        PreimageRule r;
        r.image_id = id;
        uint64_t sum = 0;
        for (const auto& c : comps) {
            require(c.is_object() && c.contains("index") && c.contains("degree"),
                    origin + ": " + rule_key_error(id) + ": components need index and degree");
            RuleComponent rc;
            int idx = c["index"].get<int>();
            int deg = c["degree"].get<int>();
            require(idx >= 0 && idx < 256, origin + ": " + rule_key_error(id) + ": bad component index");
            require(deg >= 1, origin + ": " + rule_key_error(id) + ": local degrees must be positive");
            rc.index = static_cast<uint32_t>(idx);
            rc.degree = static_cast<uint32_t>(deg);
            rc.state = c.contains("state") ? state_of(c["state"].get<std::string>()) : st;
            sum += rc.degree;
            r.components.push_back(rc);
        }
        std::sort(r.components.begin(), r.components.end(),
                  [](const RuleComponent& a, const RuleComponent& b) { return a.index < b.index; });
        for (uint32_t i = 0; i < r.components.size(); ++i)
            require(r.components[i].index == i, origin + ": " + rule_key_error(id) + ": component indices must be 0..k-1");
        if (sum != static_cast<uint64_t>(s->degree))
            fail(ErrorKind::Validation, origin + ": degree-sum mismatch in " + rule_key_error(id) + ": local degrees sum to " +
                                            std::to_string(sum) + ", expected " + std::to_string(s->degree));
        s->rules.push_back(std::move(r));
    }
    for (uint32_t i = 0; i < s->elements.size(); ++i) s->element_state.push_back(i);
    if (j.contains("tokens")) {
        const Json& tj = j["tokens"];
        require(tj.is_array(), origin + ": \"tokens\" must be an array");
        std::map<std::string, uint32_t> tid;
        for (const auto& t : tj) {
            require(t.is_object() && t.contains("id") && t["id"].is_string(), origin + ": tokens need string ids");
            auto id = t["id"].get<std::string>();
            require(tid.emplace(id, static_cast<uint32_t>(tid.size())).second, origin + ": duplicate token '" + id + "'");
        }
        for (const auto& t : tj) {
            ContactToken ct;
            ct.id = t["id"].get<std::string>();
            uint32_t self = tid[ct.id];
            if (t.contains("pair") && !t["pair"].is_null()) {
                const auto& p = t["pair"];
                require(p.is_array() && p.size() == 2 && p[0].is_string() && p[1].is_string(),
                        origin + ": token " + ct.id + ": pair must be two cell references");
                ct.pair = std::make_pair(parse_ref(p[0].get<std::string>(), *s), parse_ref(p[1].get<std::string>(), *s));
            }
            require(t.contains("lifts") && t["lifts"].is_array(), origin + ": token " + ct.id + " needs lifts");
            for (const auto& l : t["lifts"]) {
                TokenLift tl;
                tl.next = self;
                if (l.is_array()) {
                    require(l.size() == 3 || l.size() == 4, origin + ": token " + ct.id + ": lift arrays are [i, j, m(, next)]");
                    tl.first = l[0].get<uint32_t>();
                    tl.second = l[1].get<uint32_t>();
                    tl.multiplicity = l[2].get<uint32_t>();
                    if (l.size() == 4) {
                        auto it = tid.find(l[3].get<std::string>());
                        require(it != tid.end(), origin + ": token " + ct.id + ": unknown next token");
                        tl.next = it->second;
                    }
                } else {
                    require(l.is_object(), origin + ": token " + ct.id + ": malformed lift");
                    tl.first = l.at("first").get<uint32_t>();
                    tl.second = l.at("second").get<uint32_t>();
                    tl.multiplicity = l.value("multiplicity", 1u);
                    if (l.contains("next")) {
                        auto it = tid.find(l["next"].get<std::string>());
                        require(it != tid.end(), origin + ": token " + ct.id + ": unknown next token");
                        tl.next = it->second;
                    }
                }
                ct.lifts.push_back(tl);
            }
            s->tokens.push_back(std::move(ct));
        }
    }
    validate_tokens(*s);
    index_tokens(*s);
    return s;
}

SystemPtr substitution_from_circle(const SystemSpec& circle) {
    require(circle.backend == Backend::GeometricCircle, "substitution encoding needs a geometric circle system");
    auto s = std::make_shared<SystemSpec>();
    s->degree = circle.degree;
    s->backend = Backend::Substitution;
    s->family = "substitution";
    s->descriptor = "substitution(" + circle.descriptor + ")";
    for (const auto& e : circle.elements) s->elements.push_back({e.id, std::nullopt, {}, {}});
    add_uniform_rules(*s);
    const int d = circle.degree;
    // offset states: contact representatives differ by an integer s between the two cells
    std::map<int64_t, uint32_t> offset_token;
    std::vector<int64_t> pending;
    auto offset_id = [&](int64_t off) -> uint32_t {
        auto it = offset_token.find(off);
        if (it != offset_token.end()) return it->second;
        auto id = static_cast<uint32_t>(s->tokens.size());
        offset_token[off] = id;
        ContactToken t;
        t.id = "o:" + std::to_string(off);
        s->tokens.push_back(t);
        pending.push_back(off);
        return id;
    };
    auto lifts_for = [&](int64_t off) {
        std::vector<TokenLift> out;
        for (int64_t k = 0; k < d; ++k) {
            int64_t j = ((k - off) % d + d) % d;
            int64_t t = (off + j - k) / d;
            out.push_back({static_cast<uint32_t>(k), static_cast<uint32_t>(j), 1, offset_id(t)});
        }
        return out;
    };
    auto add_base = [&](const std::string& id, CellRef a, CellRef b, const Rational& lo1, const Rational& hi1,
                        const Rational& lo2, const Rational& hi2) {
        int n = 0;
        for (int64_t m = -2; m <= 2; ++m) {
            if (!(max(lo1, lo2 + Rational(m)) < min(hi1, hi2 + Rational(m)))) continue;
            ContactToken t;
            t.id = id + ":" + std::to_string(n++);
            t.pair = std::make_pair(a, b);
            t.lifts = lifts_for(-m);
            s->tokens.push_back(t);
        }
    };
    const auto& els = circle.elements;
    for (uint32_t p = 0; p < els.size(); ++p) {
        for (uint32_t q = p + 1; q < els.size(); ++q)
            add_base("h:" + els[p].id + ":" + els[q].id, {p, -1}, {q, -1}, els[p].arc->first, els[p].arc->second,
                     els[q].arc->first, els[q].arc->second);
    }
    for (uint32_t p = 0; p < els.size(); ++p) {
        for (int i = 0; i < d; ++i) {
            Rational lo = (els[p].arc->first + Rational(i)) / Rational(d);
            Rational hi = (els[p].arc->second + Rational(i)) / Rational(d);
            for (uint32_t q = 0; q < els.size(); ++q)
                add_base("v:" + els[p].id + "/" + std::to_string(i) + ":" + els[q].id, {p, i}, {q, -1}, lo, hi,
                         els[q].arc->first, els[q].arc->second);
        }
    }
    while (!pending.empty()) {
        int64_t off = pending.back();
        pending.pop_back();
        auto lifts = lifts_for(off);
        s->tokens[offset_token[off]].lifts = lifts;
    }
    validate_tokens(*s);
    index_tokens(*s);
    return s;
}

SystemPtr load_system(const std::string& source) {
    std::string src = source;
    if (src.rfind("builtin:", 0) == 0) src = src.substr(8);
    auto colon = src.find(':');
    std::string head = src.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : src.substr(colon + 1);
    if (head == "circle") {
        auto p = parse_params(rest, source);
        check_keys(p, {"d", "arcs", "overlap"}, source);
        std::optional<Rational> ov;
        if (p.count("overlap")) ov = Rational::parse(p["overlap"]);
        return circle_system(parse_positive(p, "d", 2, source), parse_positive(p, "arcs", 4, source), ov);
    }
    if (head == "fullshift") {
        auto p = parse_params(rest, source);
        check_keys(p, {"d", "cover"}, source);
        std::string cover = p.count("cover") ? p["cover"] : "letters";
        require(cover == "letters" || cover == "whole", "descriptor '" + source + "': cover must be letters or whole");
        return fullshift_system(parse_positive(p, "d", 2, source), cover == "whole");
    }
    if (head == "barycentric" && rest.empty()) return fsr_system(fsr::barycentric_rule(), "barycentric");
    if (head == "squaregrid" && rest.empty()) return fsr_system(fsr::square_rule(), "squaregrid");
    if (head == "fsr") {
        require(!rest.empty(), "descriptor 'fsr:' needs a rule file path");
        Json j = read_json_file(rest);
        return fsr_system(fsr::rule_from_json(j), "fsr:" + rest);
    }
    // anything path-like is read as a file so a missing file reports an I/O error
    bool path_like = source.find('/') != std::string::npos ||
                     (source.size() > 5 && source.compare(source.size() - 5, 5, ".json") == 0);
    if (path_like || std::filesystem::exists(source)) return system_from_json(read_json_file(source), source);
    fail(ErrorKind::Validation, "unrecognized system '" + source + "'");
}

std::vector<std::pair<CellAddress, uint32_t>> preimage_components(const SystemSpec& spec, const CellAddress& addr) {
    std::vector<std::pair<CellAddress, uint32_t>> out;
    for (auto& ch : spec.children(spec.cell_at(addr))) out.emplace_back(ch.cell.addr, ch.local_degree);
    return out;
}

bool intersects(const SystemSpec& spec, const CellAddress& a, const CellAddress& b) {
    return spec.intersects(spec.cell_at(a), spec.cell_at(b));
}

uint64_t level_size_estimate(const SystemSpec& spec, int n) {
    unsigned __int128 v = spec.elements.size();
    for (int i = 1; i < n; ++i) {
        v *= static_cast<unsigned>(spec.degree);
        if (v > (static_cast<unsigned __int128>(1) << 62)) return UINT64_MAX;
    }
    return static_cast<uint64_t>(v);
}

std::vector<CellAddress> enumerate_level(const SystemSpec& spec, int n, uint64_t budget) {
    require(n >= 1, "enumerate_level: n must be at least 1");
    uint64_t est = level_size_estimate(spec, n);
    if (est > budget)
        fail(ErrorKind::Budget, "level " + std::to_string(n) + " may hold " + std::to_string(est) +
                                    " cells, over the budget of " + std::to_string(budget));
    std::vector<Cell> cur;
    for (uint32_t r = 0; r < spec.elements.size(); ++r) cur.push_back(spec.root_cell(r));
    for (int level = 1; level < n; ++level) {
        std::vector<Cell> next;
        for (const auto& c : cur)
            for (auto& ch : spec.children(c)) next.push_back(std::move(ch.cell));
        cur.swap(next);
    }
    std::vector<CellAddress> out;
    for (auto& c : cur) out.push_back(c.addr);
    return out;
}

}  // namespace cxc
