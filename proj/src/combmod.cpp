#include "cxc/combmod.hpp"

#include "cxc/errors.hpp"
#include "cxc/fsr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

namespace cxc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<uint32_t> sorted_unique(std::vector<uint32_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool reaches(const AnnulusProblem& p) {
    std::vector<char> seen(p.shingles.size(), 0);
    std::vector<char> is_outer(p.shingles.size(), 0);
    for (auto o : p.outer) is_outer[o] = 1;
    std::deque<uint32_t> q;
    for (auto s : p.inner) {
        seen[s] = 1;
        q.push_back(s);
    }
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        if (is_outer[u]) return true;
        for (auto v : p.shingles.nerve[u])
            if (!seen[v]) {
                seen[v] = 1;
                q.push_back(v);
            }
    }
    return false;
}

// Dinic max-flow on doubles.
class FlowNetwork {
public:
    explicit FlowNetwork(size_t n) : adj_(n), level_(n), it_(n) {}

    void add_arc(uint32_t u, uint32_t v, double cap) {
        adj_[u].push_back(arcs_.size());
        arcs_.push_back({v, cap});
        adj_[v].push_back(arcs_.size());
        arcs_.push_back({u, 0.0});
    }

    double max_flow(uint32_t s, uint32_t t) {
        double total = 0;
        while (bfs(s, t)) {
            std::fill(it_.begin(), it_.end(), 0);
            while (true) {
                double f = dfs(s, t, kInf);
                if (f <= kEps) break;
                total += f;
            }
        }
        return total;
    }

    /// Nodes reachable from s in the residual network.
    std::vector<char> source_side(uint32_t s) const {
        std::vector<char> seen(adj_.size(), 0);
        std::deque<uint32_t> q{s};
        seen[s] = 1;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto a : adj_[u])
                if (arcs_[a].cap > kEps && !seen[arcs_[a].to]) {
                    seen[arcs_[a].to] = 1;
                    q.push_back(arcs_[a].to);
                }
        }
        return seen;
    }

    /// Nodes that can still reach t in the residual network.
    std::vector<char> sink_side(uint32_t t) const {
        std::vector<char> seen(adj_.size(), 0);
        std::deque<uint32_t> q{t};
        seen[t] = 1;
        while (!q.empty()) {
            auto v = q.front();
            q.pop_front();
            for (auto a : adj_[v]) {
                // reverse arc a^1 goes u -> v; usable if it has residual capacity
                auto u = arcs_[a].to;
                if (arcs_[a ^ 1].cap > kEps && !seen[u]) {
                    seen[u] = 1;
                    q.push_back(u);
                }
            }
        }
        return seen;
    }

private:
    static constexpr double kEps = 1e-15;
    struct Arc {
        uint32_t to;
        double cap;
    };

    bool bfs(uint32_t s, uint32_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::deque<uint32_t> q{s};
        level_[s] = 0;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto a : adj_[u])
                if (arcs_[a].cap > kEps && level_[arcs_[a].to] < 0) {
                    level_[arcs_[a].to] = level_[u] + 1;
                    q.push_back(arcs_[a].to);
                }
        }
        return level_[t] >= 0;
    }

    double dfs(uint32_t u, uint32_t t, double f) {
        if (u == t) return f;
        for (auto& i = it_[u]; i < adj_[u].size(); ++i) {
            auto a = adj_[u][i];
            auto v = arcs_[a].to;
            if (arcs_[a].cap > kEps && level_[v] == level_[u] + 1) {
                double got = dfs(v, t, std::min(f, arcs_[a].cap));
                if (got > kEps) {
                    arcs_[a].cap -= got;
                    arcs_[a ^ 1].cap += got;
                    return got;
                }
            }
        }
        return 0;
    }

    std::vector<std::vector<size_t>> adj_;
    std::vector<Arc> arcs_;
    std::vector<int> level_;
    std::vector<size_t> it_;
};

std::vector<ChainWeight> violated_transversals(const AnnulusProblem& p, const std::vector<double>& rho,
                                               size_t cap) {
    const size_t n = p.shingles.size();
    std::vector<double> dist(n, kInf);
    std::vector<uint32_t> prev(n, UINT32_MAX);
    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (auto s : p.inner) {
        dist[s] = rho[s];
        pq.push({dist[s], s});
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto v : p.shingles.nerve[u]) {
            double nd = d + rho[v];
            if (nd < dist[v]) {
                dist[v] = nd;
                prev[v] = u;
                pq.push({nd, v});
            }
        }
    }
    std::vector<ChainWeight> out;
    std::vector<uint32_t> order = p.outer;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    std::set<Chain> seen;
    for (auto t : order) {
        if (dist[t] == kInf) continue;
        Chain c;
        for (uint32_t v = t; v != UINT32_MAX; v = prev[v]) c.push_back(v);
        c = sorted_unique(std::move(c));
        if (!seen.insert(c).second) continue;
        out.push_back({dist[t], std::move(c)});
        if (out.size() >= cap) break;
    }
    return out;
}

std::vector<ChainWeight> min_cuts(const AnnulusProblem& p, const std::vector<double>& rho) {
    const uint32_t n = static_cast<uint32_t>(p.shingles.size());
    const uint32_t s = 2 * n, t = 2 * n + 1;
    FlowNetwork net(2 * n + 2);
    for (uint32_t v = 0; v < n; ++v) {
        net.add_arc(2 * v, 2 * v + 1, std::max(0.0, rho[v]));
        for (auto w : p.shingles.nerve[v]) net.add_arc(2 * v + 1, 2 * w, kInf);
    }
    for (auto v : p.inner) net.add_arc(s, 2 * v, kInf);
    for (auto v : p.outer) net.add_arc(2 * v + 1, t, kInf);
    net.max_flow(s, t);
    auto src = net.source_side(s);
    auto snk = net.sink_side(t);
    Chain a, b;
    for (uint32_t v = 0; v < n; ++v) {
        if (src[2 * v] && !src[2 * v + 1]) a.push_back(v);
        if (snk[2 * v + 1] && !snk[2 * v]) b.push_back(v);
    }
    std::vector<ChainWeight> out;
    out.push_back({chain_weight(a, rho), a});
    if (b != a) out.push_back({chain_weight(b, rho), b});
    std::sort(out.begin(), out.end(), [](const ChainWeight& x, const ChainWeight& y) {
        return x.weight != y.weight ? x.weight < y.weight : x.chain < y.chain;
    });
    return out;
}

QpResult hildreth(const std::vector<Chain>& cons, size_t dim, std::vector<double> lambda, double tol,
                  int max_sweeps) {
    QpResult r;
    lambda.resize(cons.size(), 0.0);
    r.rho.assign(dim, 0.0);
    for (size_t i = 0; i < cons.size(); ++i)
        for (auto s : cons[i]) r.rho[s] += lambda[i];
    for (r.sweeps = 0; r.sweeps < max_sweeps; ++r.sweeps) {
        double change = 0, viol = 0;
        for (size_t i = 0; i < cons.size(); ++i) {
            double ell = 0;
            for (auto s : cons[i]) ell += r.rho[s];
            double g = 1.0 - ell;
            viol = std::max(viol, g);
            double delta = std::max(-lambda[i], g / static_cast<double>(cons[i].size()));
            if (delta == 0) continue;
            lambda[i] += delta;
            for (auto s : cons[i]) r.rho[s] += delta;
            change = std::max(change, std::abs(delta));
        }
        if (change < tol && viol < tol) {
            r.converged = true;
            ++r.sweeps;
            break;
        }
    }
    r.lambda = std::move(lambda);
    r.objective = 0;
    for (double x : r.rho) r.objective += x * x;
    return r;
}

// Equality-constrained solve on the active set; accepted when feasible and no worse.
void polish(const std::vector<Chain>& cons, size_t dim, QpResult& r) {
    std::vector<size_t> act;
    for (size_t i = 0; i < cons.size(); ++i)
        if (r.lambda[i] > 1e-10) act.push_back(i);
    if (act.empty()) return;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(act.size()), static_cast<Eigen::Index>(dim));
    for (size_t k = 0; k < act.size(); ++k)
        for (auto s : cons[act[k]]) a(static_cast<Eigen::Index>(k), s) = 1.0;
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(act.size()));
    Eigen::MatrixXd gram = a * a.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::VectorXd mu;
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        mu = ldlt.solve(ones);
        ok = (gram * mu - ones).norm() < 1e-9 * std::sqrt(static_cast<double>(act.size()));
    }
    Eigen::VectorXd rho;
    if (ok) {
        rho = a.transpose() * mu;
    } else {
        rho = a.completeOrthogonalDecomposition().solve(ones);
        mu = Eigen::VectorXd();
    }
    for (Eigen::Index s = 0; s < rho.size(); ++s)
        if (rho(s) < -1e-12) return;
    for (const auto& c : cons) {
        double ell = 0;
        for (auto s : c) ell += rho(s);
        if (ell < 1.0 - 1e-10) return;
    }
    double obj = rho.squaredNorm();
    if (obj > r.objective + 1e-9 * std::max(1.0, r.objective)) {
        // Hildreth is feasible up to tol, so a much larger value means a wrong active set.
        double viol = 0;
        for (const auto& c : cons) {
            double ell = 0;
            for (auto s : c) ell += r.rho[s];
            viol = std::max(viol, 1.0 - ell);
        }
        if (viol < 1e-10) return;
    }
    for (size_t s = 0; s < dim; ++s) r.rho[s] = std::max(0.0, rho(static_cast<Eigen::Index>(s)));
    if (mu.size() == static_cast<Eigen::Index>(act.size())) {
        std::fill(r.lambda.begin(), r.lambda.end(), 0.0);
        for (size_t k = 0; k < act.size(); ++k) r.lambda[act[k]] = std::max(0.0, mu(static_cast<Eigen::Index>(k)));
    }
    r.objective = 0;
    for (double x : r.rho) r.objective += x * x;
}

QpResult solve_warm(const std::vector<Chain>& cons, size_t dim, std::vector<double> lambda, double tol,
                    int max_sweeps) {
    auto r = hildreth(cons, dim, std::move(lambda), tol, max_sweeps);
    polish(cons, dim, r);
    return r;
}

Json chain_json(const AnnulusProblem& p, const Chain& c) {
    Json a = Json::array();
    for (auto s : c) a.push_back(p.shingles.ids[s]);
    return a;
}

}  // namespace

uint32_t Shingling::overlap_bound() const {
    size_t m = 0;
    for (const auto& nb : nerve) m = std::max(m, nb.size() + 1);
    return static_cast<uint32_t>(m);
}

void Shingling::add_edge(uint32_t a, uint32_t b) {
    if (a == b) return;
    auto ins = [](std::vector<uint32_t>& v, uint32_t x) {
        auto it = std::lower_bound(v.begin(), v.end(), x);
        if (it == v.end() || *it != x) v.insert(it, x);
    };
    ins(nerve[a], b);
    ins(nerve[b], a);
}

bool AnnulusProblem::degenerate() const {
    for (auto s : inner)
        if (std::find(outer.begin(), outer.end(), s) != outer.end()) return true;
    return false;
}

Json AnnulusProblem::to_json() const {
    Json j;
    j["schema"] = "v1";
    j["kind"] = "annulus";
    j["name"] = name;
    j["shingles"] = shingles.ids;
    Json edges = Json::array();
    for (uint32_t a = 0; a < shingles.size(); ++a)
        for (auto b : shingles.nerve[a])
            if (a < b) edges.push_back(Json::array({shingles.ids[a], shingles.ids[b]}));
    j["edges"] = edges;
    j["inner"] = chain_json(*this, inner);
    j["outer"] = chain_json(*this, outer);
    Json sl = Json::array();
    for (auto s : slit) sl.push_back(shingles.ids[s]);
    j["slit"] = sl;
    j["overlap_bound"] = shingles.overlap_bound();
    return j;
}

void validate_problem(const AnnulusProblem& p) {
    const size_t n = p.shingles.size();
    require(n > 0, "annulus problem has no shingles");
    require(p.shingles.nerve.size() == n, "nerve size does not match shingle count");
    std::set<std::string> ids(p.shingles.ids.begin(), p.shingles.ids.end());
    require(ids.size() == n, "duplicate shingle id");
    for (uint32_t a = 0; a < n; ++a)
        for (auto b : p.shingles.nerve[a]) {
            require(b < n, "nerve edge out of range");
            require(b != a, "nerve self-loop at '" + p.shingles.ids[a] + "'");
            require(std::binary_search(p.shingles.nerve[b].begin(), p.shingles.nerve[b].end(), a),
                    "nerve is not symmetric");
        }
    require(!p.inner.empty(), "inner boundary set is empty");
    require(!p.outer.empty(), "outer boundary set is empty");
    for (auto s : p.inner) require(s < n, "inner boundary shingle out of range");
    for (auto s : p.outer) require(s < n, "outer boundary shingle out of range");
    if (!p.slit.empty()) {
        require(std::find(p.inner.begin(), p.inner.end(), p.slit.front()) != p.inner.end(),
                "slit must start on the inner boundary");
        require(std::find(p.outer.begin(), p.outer.end(), p.slit.back()) != p.outer.end(),
                "slit must end on the outer boundary");
        for (size_t i = 0; i < p.slit.size(); ++i) {
            require(p.slit[i] < n, "slit shingle out of range");
            if (i > 0)
                require(std::binary_search(p.shingles.nerve[p.slit[i - 1]].begin(),
                                           p.shingles.nerve[p.slit[i - 1]].end(), p.slit[i]),
                        "slit is not a nerve path");
        }
        require(sorted_unique(p.slit).size() == p.slit.size(), "slit repeats a shingle");
    }
}

AnnulusProblem problem_from_json(const Json& j, const std::string& origin) {
    auto where = [&](const std::string& m) { return origin + ": " + m; };
    require(j.is_object(), where("expected an object"));
    require(j.contains("shingles"), where("missing 'shingles'"));
    AnnulusProblem p;
    p.name = j.value("name", origin);
    const Json& sh = j.at("shingles");
    std::unordered_map<std::string, uint32_t> index;
    if (sh.is_number_integer()) {
        int count = sh.get<int>();
        require(count > 0, where("'shingles' must be positive"));
        for (int i = 0; i < count; ++i) p.shingles.ids.push_back(std::to_string(i));
    } else {
        require(sh.is_array(), where("'shingles' must be an array or a count"));
        for (const auto& s : sh) {
            require(s.is_string() || s.is_number_integer(), where("shingle ids must be strings or integers"));
            p.shingles.ids.push_back(s.is_string() ? s.get<std::string>() : std::to_string(s.get<long long>()));
        }
    }
    for (uint32_t i = 0; i < p.shingles.ids.size(); ++i) {
        require(index.emplace(p.shingles.ids[i], i).second, where("duplicate shingle id '" + p.shingles.ids[i] + "'"));
    }
    p.shingles.nerve.assign(p.shingles.ids.size(), {});
    auto ref = [&](const Json& x) -> uint32_t {
        std::string key = x.is_string() ? x.get<std::string>()
                          : x.is_number_integer() ? std::to_string(x.get<long long>())
                                                  : std::string("?");
        auto it = index.find(key);
        require(it != index.end(), where("unknown shingle '" + key + "'"));
        return it->second;
    };
    const char* edge_key = j.contains("edges") ? "edges" : "nerve";
    if (j.contains(edge_key)) {
        require(j.at(edge_key).is_array(), where("'edges' must be an array"));
        for (const auto& e : j.at(edge_key)) {
            require(e.is_array() && e.size() == 2, where("an edge is a pair of shingle ids"));
            auto a = ref(e[0]), b = ref(e[1]);
            require(a != b, where("nerve self-loop at '" + p.shingles.ids[a] + "'"));
            p.shingles.add_edge(a, b);
        }
    }
    auto list = [&](const char* key, bool needed) {
        std::vector<uint32_t> out;
        if (!j.contains(key)) {
            require(!needed, where(std::string("missing '") + key + "'"));
            return out;
        }
        require(j.at(key).is_array(), where(std::string("'") + key + "' must be an array"));
        for (const auto& x : j.at(key)) out.push_back(ref(x));
        return out;
    };
    p.inner = sorted_unique(list("inner", true));
    p.outer = sorted_unique(list("outer", true));
    p.slit = list("slit", false);
    try {
        validate_problem(p);
    } catch (const Error& e) {
        fail(e.kind(), where(e.what()));
    }
    return p;
}

namespace {

AnnulusProblem with_ids(std::vector<std::string> ids) {
    AnnulusProblem p;
    p.shingles.ids = std::move(ids);
    p.shingles.nerve.assign(p.shingles.ids.size(), {});
    return p;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Validation, "bad integer '" + s + "' in " + what);
}

std::pair<int, int> parse_dims(const std::string& s, const std::string& what) {
    auto x = s.find('x');
    require(x != std::string::npos, "expected AxB in " + what);
    return {parse_int(s.substr(0, x), what), parse_int(s.substr(x + 1), what)};
}

}  // namespace

AnnulusProblem path_problem(int k) {
    require(k >= 1, "path length must be positive");
    std::vector<std::string> ids;
    for (int i = 0; i < k; ++i) ids.push_back("p" + std::to_string(i));
    auto p = with_ids(ids);
    p.name = "path-" + std::to_string(k);
    for (int i = 0; i + 1 < k; ++i) p.shingles.add_edge(i, i + 1);
    p.inner = {0};
    p.outer = {static_cast<uint32_t>(k - 1)};
    for (int i = 0; i < k; ++i) p.slit.push_back(i);
    return p;
}

AnnulusProblem parallel_problem(int m, int k) {
    require(m >= 1 && k >= 1, "parallel chains need m, k >= 1");
    std::vector<std::string> ids;
    for (int c = 0; c < m; ++c)
        for (int i = 0; i < k; ++i) ids.push_back("c" + std::to_string(c) + "." + std::to_string(i));
    auto p = with_ids(ids);
    p.name = "parallel-" + std::to_string(m) + "x" + std::to_string(k);
    for (int c = 0; c < m; ++c) {
        for (int i = 0; i + 1 < k; ++i) p.shingles.add_edge(c * k + i, c * k + i + 1);
        p.inner.push_back(c * k);
        p.outer.push_back(c * k + k - 1);
    }
    for (int i = 0; i < k; ++i) p.slit.push_back(i);
    return p;
}

AnnulusProblem ring_problem(int layers, int sectors) {
    require(layers >= 1 && sectors >= 3, "ring needs layers >= 1 and sectors >= 3");
    std::vector<std::string> ids;
    for (int l = 0; l < layers; ++l)
        for (int i = 0; i < sectors; ++i) ids.push_back("r" + std::to_string(l) + "." + std::to_string(i));
    auto p = with_ids(ids);
    p.name = "ring-" + std::to_string(layers) + "x" + std::to_string(sectors);
    auto id = [&](int l, int i) { return static_cast<uint32_t>(l * sectors + ((i % sectors) + sectors) % sectors); };
    for (int l = 0; l < layers; ++l)
        for (int i = 0; i < sectors; ++i) {
            p.shingles.add_edge(id(l, i), id(l, i + 1));
            if (l + 1 < layers)
                for (int di = -1; di <= 1; ++di) p.shingles.add_edge(id(l, i), id(l + 1, i + di));
        }
    for (int i = 0; i < sectors; ++i) {
        p.inner.push_back(id(0, i));
        p.outer.push_back(id(layers - 1, i));
    }
    for (int l = 0; l < layers; ++l) p.slit.push_back(id(l, 0));
    return p;
}

AnnulusProblem grid_minus_center_problem() {
    std::vector<std::string> ids;
    std::vector<std::pair<int, int>> cells;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != 1 || c != 1) {
                ids.push_back("g" + std::to_string(r) + std::to_string(c));
                cells.push_back({r, c});
            }
    auto p = with_ids(ids);
    p.name = "grid3-minus-center";
    for (uint32_t a = 0; a < cells.size(); ++a)
        for (uint32_t b = a + 1; b < cells.size(); ++b)
            if (std::abs(cells[a].first - cells[b].first) <= 1 && std::abs(cells[a].second - cells[b].second) <= 1)
                p.shingles.add_edge(a, b);
    // inner: cells sharing a side with the hole; outer: the corners
    for (uint32_t a = 0; a < cells.size(); ++a) {
        bool side = std::abs(cells[a].first - 1) + std::abs(cells[a].second - 1) == 1;
        (side ? p.inner : p.outer).push_back(a);
    }
    p.slit = {1, 0};
    return p;
}

AnnulusProblem touching_problem() {
    // b lies on both boundaries, so {b} is a transversal chain of length 1
    auto p = with_ids({"a", "b", "c"});
    p.name = "touching";
    p.shingles.add_edge(0, 1);
    p.shingles.add_edge(1, 2);
    p.inner = {0, 1};
    p.outer = {1};
    p.slit = {1};
    return p;
}

AnnulusProblem disconnected_problem() {
    auto p = with_ids({"a", "b", "c", "d"});
    p.name = "disconnected";
    p.shingles.add_edge(0, 1);
    p.shingles.add_edge(2, 3);
    p.inner = {0};
    p.outer = {3};
    return p;
}

AnnulusProblem load_problem(const std::string& source) {
    std::string s = source;
    if (s.rfind("builtin:", 0) == 0) {
        s = s.substr(8);
        auto colon = s.find(':');
        std::string head = s.substr(0, colon);
        std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
        if (head == "path") return path_problem(arg.empty() ? 4 : parse_int(arg, source));
        if (head == "parallel") {
            auto [m, k] = arg.empty() ? std::pair{2, 3} : parse_dims(arg, source);
            return parallel_problem(m, k);
        }
        if (head == "ring") {
            auto [l, k] = arg.empty() ? std::pair{2, 4} : parse_dims(arg, source);
            return ring_problem(l, k);
        }
        if (head == "grid3") return grid_minus_center_problem();
        if (head == "touching") return touching_problem();
        if (head == "disconnected") return disconnected_problem();
        fail(ErrorKind::Validation, "unknown builtin annulus '" + source + "'");
    }
    return problem_from_json(read_json_file(s), s);
}

const char* family_name(Family f) { return f == Family::Transversal ? "transversal" : "separating"; }

Family parse_family(const std::string& s) {
    if (s == "t" || s == "transversal") return Family::Transversal;
    if (s == "s" || s == "separating") return Family::Separating;
    fail(ErrorKind::Validation, "family must be t or s, got '" + s + "'");
}

double chain_weight(const Chain& c, const std::vector<double>& rho) {
    double w = 0;
    for (auto s : c) w += rho[s];
    return w;
}

QpResult solve_min_norm(const std::vector<Chain>& constraints, size_t dim, double tol, int max_sweeps) {
    for (const auto& c : constraints) {
        require(!c.empty(), "empty constraint chain");
        for (auto s : c) require(s < dim, "constraint shingle out of range");
    }
    return solve_warm(constraints, dim, {}, tol, max_sweeps);
}

ChainWeight lightest_transversal(const AnnulusProblem& p, const std::vector<double>& rho) {
    if (!reaches(p)) fail(ErrorKind::NoChain, "no transversal chain: boundaries are not connected");
    return violated_transversals(p, rho, 1).front();
}

ChainWeight lightest_separating(const AnnulusProblem& p, const std::vector<double>& rho) {
    if (!reaches(p)) fail(ErrorKind::NoChain, "no transversal chain: boundaries are not connected");
    return min_cuts(p, rho).front();
}

ModulusResult modulus(const AnnulusProblem& p, Family family, const ModulusOptions& opt) {
    validate_problem(p);
    require(opt.tol > 0, "tol must be positive");
    if (!reaches(p)) fail(ErrorKind::NoChain, "no transversal chain: boundaries are not connected");
    const size_t n = p.shingles.size();
    auto oracle = [&](const std::vector<double>& rho) {
        return family == Family::Transversal ? violated_transversals(p, rho, 8) : min_cuts(p, rho);
    };

    std::vector<Chain> cons;
    std::set<Chain> have;
    auto add = [&](Chain c) {
        c = sorted_unique(std::move(c));
        require(!c.empty(), "empty chain");
        for (auto s : c) require(s < n, "extra chain shingle out of range");
        if (have.insert(c).second) {
            cons.push_back(std::move(c));
            return true;
        }
        return false;
    };
    for (const auto& c : opt.extra_chains) add(c);
    if (cons.empty())
        for (auto& cw : oracle(std::vector<double>(n, 0.0))) add(cw.chain);

    ModulusResult r;
    r.family = family;
    std::vector<double> lambda;
    double qp_tol = std::min(1e-12, opt.tol * 1e-4);
    for (r.rounds = 1; r.rounds <= opt.max_rounds; ++r.rounds) {
        auto qp = solve_warm(cons, n, lambda, qp_tol, 10000);
        lambda = qp.lambda;
        auto found = oracle(qp.rho);
        double lmin = found.front().weight;
        if (lmin >= 1.0 - opt.tol) {
            r.rho = qp.rho;
            r.relaxed = qp.objective;
            r.min_chain = lmin;
            for (size_t i = 0; i < cons.size(); ++i)
                if (qp.lambda[i] > 1e-10) r.active.push_back(cons[i]);
            r.constraints = cons.size();
            break;
        }
        bool added = false;
        for (auto& cw : found)
            if (cw.weight < 1.0 - opt.tol) added |= add(cw.chain);
        if (!added) {
            // every violated chain is already a constraint: the QP stalled short of tol
            qp = solve_warm(cons, n, lambda, qp_tol * 1e-3, 10000);
            lambda = qp.lambda;
            if (oracle(qp.rho).front().weight < 1.0 - opt.tol)
                fail(ErrorKind::Convergence, "modulus solver stalled (QP did not reach tolerance)");
        }
    }
    if (r.rounds > opt.max_rounds)
        fail(ErrorKind::Convergence, "modulus solver exceeded " + std::to_string(opt.max_rounds) + " rounds");
    double area = 0;
    for (double x : r.rho) area += x * x;
    r.mod = area / (r.min_chain * r.min_chain);
    for (double& x : r.rho) x /= r.min_chain;
    std::sort(r.active.begin(), r.active.end());
    return r;
}

Json ModulusResult::to_json(const AnnulusProblem& p) const {
    Json j;
    j["family"] = family_name(family);
    j["mod"] = mod;
    if (family == Family::Transversal) j["mod_sup"] = mod > 0 ? 1.0 / mod : kInf;
    else j["mod_inf"] = mod;
    j["relaxed_area"] = relaxed;
    j["min_chain_weight"] = min_chain;
    Json rho_j = Json::object();
    for (size_t s = 0; s < rho.size(); ++s) rho_j[p.shingles.ids[s]] = rho[s];
    j["rho"] = rho_j;
    Json act = Json::array();
    for (const auto& c : active) act.push_back(chain_json(p, c));
    j["active_chains"] = act;
    j["constraints"] = constraints;
    j["rounds"] = rounds;
    return j;
}

ModPair mod_pair(const AnnulusProblem& p, const ModulusOptions& opt) {
    ModPair r;
    r.transversal = modulus(p, Family::Transversal, opt);
    r.separating = modulus(p, Family::Separating, opt);
    r.mod_sup = 1.0 / r.transversal.mod;
    r.mod_inf = r.separating.mod;
    double scale = std::max(1.0, r.mod_sup);
    if (r.mod_inf > r.mod_sup + opt.tol * scale * 10)
        fail(ErrorKind::Internal, "mod_inf exceeds mod_sup: " + format_real(r.mod_inf) + " > " + format_real(r.mod_sup));
    return r;
}

Json ModPair::to_json(const AnnulusProblem& p) const {
    Json j;
    j["schema"] = "v1";
    j["kind"] = "modulus";
    j["problem"] = p.name;
    j["shingles"] = p.shingles.size();
    j["overlap_bound"] = p.shingles.overlap_bound();
    j["degenerate"] = p.degenerate();
    j["mod_inf"] = mod_inf;
    j["mod_sup"] = mod_sup;
    j["transversal"] = transversal.to_json(p);
    j["separating"] = separating.to_json(p);
    return j;
}

TileAnnulus band_annulus(const fsr::Tiling& t, int lo, int hi) {
    require(t.corners() == 4, "band annulus needs a square rule");
    require(0 < lo && lo < hi && hi < 4, "band rows must satisfy 0 < lo < hi < 4");
    const int base = 2;
    require(t.max_level() >= base, "tiling too shallow for the band annulus");
    TileAnnulus a;
    a.base_level = base;
    a.description = "band y in [" + std::to_string(lo) + "/4, " + std::to_string(hi) + "/4]";
    const int64_t scale = t.scale();
    for (uint32_t x = 0; x < t.tile_count(base); ++x) {
        const uint32_t* v = t.tile_vertices(base, x);
        int64_t lo_y = std::numeric_limits<int64_t>::max(), hi_y = std::numeric_limits<int64_t>::min();
        for (int c = 0; c < 4; ++c) {
            lo_y = std::min(lo_y, t.vertex_point(base, v[c]).y);
            hi_y = std::max(hi_y, t.vertex_point(base, v[c]).y);
        }
        require((4 * lo_y) % scale == 0 && (4 * hi_y) % scale == 0 && 4 * (hi_y - lo_y) == scale,
                "annulus not representable: base tiles are not rows of height 1/4");
        int row = static_cast<int>(4 * lo_y / scale);
        (row < lo ? a.inner_disk : row >= hi ? a.outer_disk : a.region).push_back(x);
    }
    return a;
}

uint32_t branch_vertex(const fsr::Tiling& t) {
    require(t.max_level() >= 1, "tiling too shallow");
    uint32_t best = UINT32_MAX;
    int best_deg = 0;
    for (uint32_t v = 0; v < t.vertex_count(0); ++v) {
        auto v1 = t.find_vertex(1, t.vertex_point(0, v));
        if (!v1 || t.vertex_image(1, *v1) != v) continue;
        int deg = t.local_degree(1, *v1);
        if (deg > best_deg) {
            best_deg = deg;
            best = v;
        }
    }
    require(best != UINT32_MAX, "no fixed level-0 vertex");
    return best;
}

TileAnnulus vertex_ring_annulus(const fsr::Tiling& t, int base_level, uint32_t vertex0) {
    require(base_level >= 0 && base_level <= t.max_level(), "base level out of range");
    require(vertex0 < t.vertex_count(0), "vertex out of range");
    auto v = t.find_vertex(base_level, t.vertex_point(0, vertex0));
    require(v.has_value(), "vertex missing from the tiling");
    TileAnnulus a;
    a.base_level = base_level;
    a.description = "ring around vertex " + std::to_string(vertex0) + " at level " + std::to_string(base_level);
    a.inner_disk = sorted_unique(t.vertex_tiles(base_level, *v));
    auto st = star(t, base_level, a.inner_disk);
    std::set<uint32_t> in(a.inner_disk.begin(), a.inner_disk.end()), ring(st.begin(), st.end());
    for (auto x : st)
        if (!in.count(x)) a.region.push_back(x);
    for (uint32_t x = 0; x < t.tile_count(base_level); ++x)
        if (!ring.count(x)) a.outer_disk.push_back(x);
    require(!a.region.empty() && !a.outer_disk.empty(), "annulus not representable at this base level");
    return a;
}

AnnulusProblem annulus_at_level(const fsr::Tiling& t, const TileAnnulus& a, int n) {
    require(n >= a.base_level, "level below the annulus base level");
    require(n <= t.max_level(), "tiling too shallow for level " + std::to_string(n));
    uint64_t div = 1;
    for (int i = a.base_level; i < n; ++i) div *= static_cast<uint64_t>(t.rule().children);
    std::vector<uint8_t> cls(t.tile_count(a.base_level), 0);  // 0 none, 1 region, 2 inner, 3 outer
    for (auto x : a.region) cls.at(x) = 1;
    for (auto x : a.inner_disk) cls.at(x) = 2;
    for (auto x : a.outer_disk) cls.at(x) = 3;
    auto klass = [&](uint32_t x) { return cls[x / div]; };

    std::unordered_map<uint32_t, uint32_t> index;
    std::vector<std::string> ids;
    std::vector<uint32_t> tiles;
    for (uint32_t x = 0; x < t.tile_count(n); ++x)
        if (klass(x) == 1) {
            index.emplace(x, static_cast<uint32_t>(tiles.size()));
            tiles.push_back(x);
            ids.push_back("L" + std::to_string(n) + ":t" + std::to_string(x));
        }
    require(!tiles.empty(), "annulus not representable: empty region");
    AnnulusProblem p = with_ids(ids);
    p.name = a.description + " @ level " + std::to_string(n);
    std::vector<char> inner(tiles.size(), 0), outer(tiles.size(), 0);
    for (uint32_t v = 0; v < t.vertex_count(n); ++v) {
        auto st = t.vertex_tiles(n, v);
        bool touches_in = false, touches_out = false;
        std::vector<uint32_t> here;
        for (auto x : st) {
            auto k = klass(x);
            if (k == 1) here.push_back(index.at(x));
            touches_in |= k == 2;
            touches_out |= k == 3;
        }
        here = sorted_unique(here);
        for (size_t i = 0; i < here.size(); ++i) {
            if (touches_in) inner[here[i]] = 1;
            if (touches_out) outer[here[i]] = 1;
            for (size_t j = i + 1; j < here.size(); ++j) p.shingles.add_edge(here[i], here[j]);
        }
    }
    for (uint32_t s = 0; s < tiles.size(); ++s) {
        if (inner[s]) p.inner.push_back(s);
        if (outer[s]) p.outer.push_back(s);
    }
    require(!p.inner.empty() && !p.outer.empty(), "annulus not representable: a boundary is not touched");
    validate_problem(p);
    return p;
}

ScanReport conformality_scan(const SystemSpec& spec, const TileAnnulus& a, int n1, int n2, const ModulusOptions& opt) {
    if (spec.backend != Backend::Fsr) fail(ErrorKind::Unsupported, "conformality scan needs an fsr system");
    require(n1 >= a.base_level && n1 <= n2, "scan levels must satisfy base <= n1 <= n2");
    auto tiling = spec.tiling(n2);
    ScanReport r;
    r.annulus = a.description;
    double lo = kInf, hi = 0;
    for (int n = n1; n <= n2; ++n) {
        auto p = annulus_at_level(*tiling, a, n);
        auto mp = mod_pair(p, opt);
        r.entries.push_back({n, p.shingles.size(), mp.mod_inf, mp.mod_sup});
        for (double v : {mp.mod_inf, mp.mod_sup}) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (r.entries.size() >= 2) {
            const auto& a0 = r.entries[r.entries.size() - 2];
            const auto& a1 = r.entries.back();
            for (auto [x, y] : {std::pair{a0.mod_inf, a1.mod_inf}, std::pair{a0.mod_sup, a1.mod_sup}})
                r.max_step_ratio = std::max(r.max_step_ratio, std::max(x, y) / std::min(x, y));
        }
    }
    r.m = std::sqrt(lo * hi);
    r.k = std::sqrt(hi / lo);
    return r;
}

Json ScanReport::to_json() const {
    Json j;
    j["schema"] = "v1";
    j["kind"] = "conformality_scan";
    j["annulus"] = annulus;
    Json e = Json::array();
    for (const auto& x : entries)
        e.push_back({{"level", x.level}, {"shingles", x.shingles}, {"mod_inf", x.mod_inf}, {"mod_sup", x.mod_sup}});
    j["entries"] = e;
    j["band"] = {{"m", m}, {"K", k}};
    j["max_step_ratio"] = max_step_ratio;
    j["advisory"] = true;
    return j;
}

}  // namespace cxc
