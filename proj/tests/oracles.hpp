#pragma once

// Independent reference computations used only by the tests.

#include "cxc/combmod.hpp"
#include "cxc/gamma.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <vector>

namespace oracle {

/// Plain BFS over the adjacency of the built graph.
inline std::vector<int> bfs(const cxc::GammaGraph& g, uint32_t s) {
    std::vector<int> d(g.vertex_count(), -1);
    std::deque<uint32_t> q{s};
    d[s] = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        for (auto v : g.neighbors(u))
            if (d[v] < 0) {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
    }
    return d;
}

/// max over triples of min((x|y), (y|z)) - (x|z), products based at o.
inline double delta_bruteforce(const cxc::GammaGraph& g) {
    const size_t n = g.vertex_count();
    std::vector<std::vector<int>> d(n);
    for (uint32_t x = 0; x < n; ++x) d[x] = bfs(g, x);
    auto gp = [&](uint32_t a, uint32_t b) { return 0.5 * (d[0][a] + d[0][b] - d[a][b]); };
    double best = 0;
    for (uint32_t x = 0; x < n; ++x)
        for (uint32_t y = 0; y < n; ++y)
            for (uint32_t z = 0; z < n; ++z) best = std::max(best, std::min(gp(x, y), gp(y, z)) - gp(x, z));
    return best;
}

/// Edge length as the integral of e^{-εt} along the edge, t the distance to o.
inline double edge_length(uint32_t lu, uint32_t lv, double eps) {
    if (lu == lv) return 2.0 * (std::exp(-eps * lu) - std::exp(-eps * (lu + 0.5))) / eps;
    uint32_t lo = std::min(lu, lv);
    return (std::exp(-eps * lo) - std::exp(-eps * (lo + 1))) / eps;
}

/// Dijkstra from s with oracle edge lengths.
inline std::vector<double> visual_distances(const cxc::GammaGraph& g, uint32_t s, double eps) {
    std::vector<double> d(g.vertex_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (du > d[u]) continue;
        for (auto v : g.neighbors(u)) {
            double nd = du + edge_length(g.level(u), g.level(v), eps);
            if (nd < d[v]) {
                d[v] = nd;
                pq.push({nd, v});
            }
        }
    }
    return d;
}

/// Lawson–Hanson nonnegative least squares: min ||E u - f|| with u >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f) {
    const Eigen::Index m = e.cols();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    std::vector<bool> in_p(static_cast<size_t>(m), false);
    const double tol = 1e-12;
    for (int outer = 0; outer < 10 * m + 10; ++outer) {
        Eigen::VectorXd w = e.transpose() * (f - e * u);
        Eigen::Index t = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < m; ++j)
            if (!in_p[static_cast<size_t>(j)] && w(j) > best) {
                best = w(j);
                t = j;
            }
        if (t < 0) break;
        in_p[static_cast<size_t>(t)] = true;
        for (int inner = 0; inner < 10 * m + 10; ++inner) {
            std::vector<Eigen::Index> p;
            for (Eigen::Index j = 0; j < m; ++j)
                if (in_p[static_cast<size_t>(j)]) p.push_back(j);
            Eigen::MatrixXd ep(e.rows(), static_cast<Eigen::Index>(p.size()));
            for (size_t k = 0; k < p.size(); ++k) ep.col(static_cast<Eigen::Index>(k)) = e.col(p[k]);
            Eigen::VectorXd zp = ep.completeOrthogonalDecomposition().solve(f);
            Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
            for (size_t k = 0; k < p.size(); ++k) z(p[k]) = zp(static_cast<Eigen::Index>(k));
            bool positive = true;
            for (auto j : p)
                if (z(j) <= tol) positive = false;
            if (positive) {
                u = z;
                break;
            }
            double alpha = 1.0;
            for (auto j : p)
                if (z(j) <= tol) alpha = std::min(alpha, u(j) / (u(j) - z(j)));
            u += alpha * (z - u);
            for (auto j : p)
                if (u(j) <= tol) {
                    in_p[static_cast<size_t>(j)] = false;
                    u(j) = 0;
                }
        }
    }
    return u;
}

/// min ||x||² subject to sum_{s in c} x_s >= 1 for every chain, via least distance programming.
inline double min_area(const std::vector<cxc::Chain>& chains, size_t dim) {
    const auto m = static_cast<Eigen::Index>(chains.size());
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n + 1, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (auto s : chains[static_cast<size_t>(i)]) e(static_cast<Eigen::Index>(s), i) = 1.0;
        e(n, i) = 1.0;
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
    f(n) = 1.0;
    Eigen::VectorXd u = nnls(e, f);
    Eigen::VectorXd r = e * u - f;
    Eigen::VectorXd x = -r.head(n) / r(n);
    return x.squaredNorm();
}

/// Every simple inner -> outer nerve path, as the set of shingles it visits.
inline std::vector<cxc::Chain> transversal_chains(const cxc::AnnulusProblem& p, size_t cap = 100000) {
    std::set<cxc::Chain> out;
    std::vector<char> on(p.shingles.size(), 0), is_outer(p.shingles.size(), 0);
    for (auto o : p.outer) is_outer[o] = 1;
    std::vector<uint32_t> path;
    std::function<void(uint32_t)> dfs = [&](uint32_t u) {
        if (out.size() >= cap) return;
        on[u] = 1;
        path.push_back(u);
        if (is_outer[u]) {
            cxc::Chain c = path;
            std::sort(c.begin(), c.end());
            out.insert(c);
        } else {
            for (auto v : p.shingles.nerve[u])
                if (!on[v]) dfs(v);
        }
        path.pop_back();
        on[u] = 0;
    };
    for (auto s : p.inner) dfs(s);
    return {out.begin(), out.end()};
}

/// Minimal shingle sets meeting every transversal chain (exhaustive over subsets).
inline std::vector<cxc::Chain> separating_sets(const cxc::AnnulusProblem& p) {
    const size_t n = p.shingles.size();
    auto chains = transversal_chains(p);
    std::vector<uint64_t> masks;
    for (const auto& c : chains) {
        uint64_t m = 0;
        for (auto s : c) m |= uint64_t{1} << s;
        masks.push_back(m);
    }
    std::vector<uint64_t> hitting;
    for (uint64_t s = 1; s < (uint64_t{1} << n); ++s) {
        bool all = true;
        for (auto m : masks)
            if (!(m & s)) {
                all = false;
                break;
            }
        if (all) hitting.push_back(s);
    }
    std::vector<cxc::Chain> out;
    for (auto s : hitting) {
        bool minimal = true;
        for (size_t b = 0; b < n && minimal; ++b)
            if ((s >> b) & 1) {
                uint64_t t = s & ~(uint64_t{1} << b);
                if (std::binary_search(hitting.begin(), hitting.end(), t)) minimal = false;
            }
        if (!minimal) continue;
        cxc::Chain c;
        for (size_t b = 0; b < n; ++b)
            if ((s >> b) & 1) c.push_back(static_cast<uint32_t>(b));
        out.push_back(c);
    }
    return out;
}

/// Label-based bijection check: same labels per level, same F, degrees and edges.
inline bool isomorphic_by_labels(const cxc::GammaGraph& a, const cxc::GammaGraph& b, std::string* why = nullptr) {
    auto bad = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    if (a.vertex_count() != b.vertex_count()) return bad("vertex counts differ");
    if (a.edge_count() != b.edge_count()) return bad("edge counts differ");
    std::map<std::string, uint32_t> index;
    for (uint32_t v = 0; v < b.vertex_count(); ++v) index[b.label(v)] = v;
    if (index.size() != b.vertex_count()) return bad("labels are not unique");
    std::vector<uint32_t> phi(a.vertex_count());
    for (uint32_t v = 0; v < a.vertex_count(); ++v) {
        auto it = index.find(a.label(v));
        if (it == index.end()) return bad("label " + a.label(v) + " missing");
        phi[v] = it->second;
    }
    for (uint32_t v = 0; v < a.vertex_count(); ++v) {
        uint32_t w = phi[v];
        if (a.level(v) != b.level(w)) return bad("level differs at " + a.label(v));
        if (a.vertex(v).degree != b.vertex(w).degree) return bad("degree differs at " + a.label(v));
        if (phi[a.F(v)] != b.F(w)) return bad("F differs at " + a.label(v));
        std::vector<uint32_t> na, nb;
        for (auto x : a.neighbors(v)) na.push_back(phi[x]);
        for (auto x : b.neighbors(w)) nb.push_back(x);
        std::sort(na.begin(), na.end());
        std::sort(nb.begin(), nb.end());
        if (na != nb) return bad("neighbors differ at " + a.label(v));
    }
    return true;
}

}  // namespace oracle
