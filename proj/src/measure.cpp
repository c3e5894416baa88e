#include "cxc/measure.hpp"

#include "cxc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cxc {

double AtomicMeasure::total() const {
    double s = 0;
    for (double m : mass) s += m;
    return s;
}

std::optional<Rational> AtomicMeasure::exact_total() const {
    if (exact.size() != mass.size()) return std::nullopt;
    Rational s(0);
    for (const auto& m : exact) s = s + m;
    return s;
}

bool AtomicMeasure::is_probability() const {
    if (auto e = exact_total()) return *e == Rational(1);
    return std::abs(total() - 1.0) <= 1e-12;
}

double AtomicMeasure::measure_of(const std::vector<uint32_t>& set) const {
    double s = 0;
    size_t i = 0, j = 0;
    while (i < support.size() && j < set.size()) {
        if (support[i] == set[j]) {
            s += mass[i];
            ++i;
            ++j;
        } else if (support[i] < set[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return s;
}

Json AtomicMeasure::to_json(const GammaGraph& g, bool atoms) const {
    Json j;
    j["atoms"] = support.size();
    j["total_mass"] = total();
    if (auto e = exact_total()) j["total_mass_exact"] = e->str();
    j["tail"] = tail;
    if (level) j["level"] = *level;
    j["probability"] = is_probability();
    if (atoms) {
        Json a = Json::array();
        for (size_t i = 0; i < support.size(); ++i) {
            Json x{{"vertex", g.label(support[i])}, {"level", g.level(support[i])}};
            if (!exact.empty())
                x["mass"] = exact[i].str();
            else
                x["mass"] = mass[i];
            a.push_back(x);
        }
        j["support"] = a;
    }
    return j;
}

std::string AtomicMeasure::to_csv(const GammaGraph& g) const {
    std::ostringstream os;
    os << "vertex,level,mass\n";
    for (size_t i = 0; i < support.size(); ++i)
        os << g.label(support[i]) << "," << g.level(support[i]) << ","
           << (exact.empty() ? format_real(mass[i]) : exact[i].str()) << "\n";
    return os.str();
}

PoincareResult poincare_series(uint64_t s1, int d, double s, int min_terms) {
    require(d >= 2, "poincare_series: degree must be at least 2");
    if (!(s > std::log(static_cast<double>(d))))
        fail(ErrorKind::Convergence, "Poincare series diverges for s <= log d");
    PoincareResult r;
    r.closed = static_cast<double>(s1) / (std::exp(s) - d);
    // term n is |S(1)| d^{n-1} e^{-ns} = |S(1)| e^{-s} q^{n-1}
    long double q = static_cast<long double>(d) * std::exp(-static_cast<long double>(s));
    long double term = static_cast<long double>(s1) * std::exp(-static_cast<long double>(s));
    long double sum = 0;
    int n = 0;
    while (n < min_terms || term > 1e-20L * sum) {
        sum += term;
        term *= q;
        ++n;
        if (n > 10000000) fail(ErrorKind::Convergence, "Poincare series: truncated sum did not settle");
    }
    r.truncated = static_cast<double>(sum);
    r.terms = n;
    r.difference = std::abs(r.truncated - r.closed);
    return r;
}

PoincareResult poincare_series(const GammaGraph& g, double s) {
    return poincare_series(g.sphere_size(1), g.spec().degree, s);
}

AtomicMeasure mu_s(const GammaGraph& g, double s) {
    const int d = g.spec().degree;
    auto P = poincare_series(g, s);
    AtomicMeasure m;
    for (int n = 1; n <= g.depth(); ++n) {
        double w = std::exp(-n * s) / P.closed;
        for (uint32_t v = g.level_begin(n); v < g.level_end(n); ++v) {
            m.support.push_back(v);
            m.mass.push_back(w * static_cast<double>(g.vertex(v).degree));
        }
    }
    // mass beyond the depth is q^N with q = d e^{-s}
    m.tail = std::pow(d * std::exp(-s), g.depth());
    return m;
}

AtomicMeasure mu_f_proxy(const GammaGraph& g, int N) {
    require(N >= 1 && N <= g.depth(), "mu_f_proxy: level out of range");
    Rational denom(static_cast<int64_t>(g.sphere_size(1)));
    for (int k = 1; k < N; ++k) denom = denom * Rational(g.spec().degree);
    AtomicMeasure m;
    m.level = N;
    for (uint32_t v = g.level_begin(N); v < g.level_end(N); ++v) {
        Rational x = Rational(static_cast<int64_t>(g.vertex(v).degree)) / denom;
        m.support.push_back(v);
        m.exact.push_back(x);
        m.mass.push_back(x.to_double());
    }
    return m;
}

bool check_pushforward(const GammaGraph& g) {
    for (int n = 1; n < g.depth(); ++n) {
        auto fine = mu_f_proxy(g, n + 1);
        auto coarse = mu_f_proxy(g, n);
        std::vector<Rational> pushed(coarse.support.size(), Rational(0));
        uint32_t base = g.level_begin(n);
        for (size_t i = 0; i < fine.support.size(); ++i) pushed[g.F(fine.support[i]) - base] = pushed[g.F(fine.support[i]) - base] + fine.exact[i];
        for (size_t i = 0; i < pushed.size(); ++i)
            if (pushed[i] != coarse.exact[i]) return false;
    }
    return true;
}

ShadowLemmaReport shadow_lemma_ratios(const GammaGraph& g, const MetricParams& p, int N) {
    require(N >= 3 && N <= g.depth(), "shadow_lemma_ratios: need 3 <= N <= depth");
    const int d = g.spec().degree;
    ShadowLemmaReport r;
    r.alpha = std::log(static_cast<double>(d)) / p.epsilon;
    auto mu = mu_f_proxy(g, N);
    r.min_ratio = std::numeric_limits<double>::infinity();
    r.max_ratio = 0;
    for (int k = 2; k <= N - 2; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        // e^{-alpha eps k} = d^{-k}
        double scale = std::pow(static_cast<double>(d), -k);
        for (uint32_t w = g.level_begin(k); w < g.level_end(k); ++w) {
            auto sh = shadow(g, w, 1);
            double ratio = mu.measure_of(sh.at_level(N)) / (static_cast<double>(g.vertex(w).degree) * scale);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ++r.vertices;
        }
        r.levels.push_back(k);
        r.level_min.push_back(lo);
        r.level_max.push_back(hi);
        r.min_ratio = std::min(r.min_ratio, lo);
        r.max_ratio = std::max(r.max_ratio, hi);
    }
    r.window = r.vertices ? std::max(r.max_ratio, 1.0 / r.min_ratio) : 0;
    return r;
}

Json ShadowLemmaReport::to_json() const {
    Json j;
    j["alpha"] = alpha;
    j["vertices"] = vertices;
    j["min_ratio"] = min_ratio;
    j["max_ratio"] = max_ratio;
    j["window_C"] = window;
    j["levels"] = levels;
    j["level_min"] = level_min;
    j["level_max"] = level_max;
    return j;
}

AtomicMeasure preimage_measure(const GammaGraph& g, uint32_t xi, int n) {
    require(xi != 0, "preimage_measure: base vertex must differ from o");
    require(n >= 0, "preimage_measure: n must be nonnegative");
    if (static_cast<int>(g.level(xi)) + n > g.depth())
        fail(ErrorKind::Validation, "preimage_measure: depth exceeded (need " + std::to_string(g.level(xi) + n) +
                                        ", graph depth " + std::to_string(g.depth()) + ")");
    // descendants in the pullback tree; d_{F^n}(zeta) = d(zeta)/d(xi)
    std::vector<uint32_t> cur{xi};
    for (int k = 0; k < n; ++k) {
        std::vector<uint32_t> next;
        for (auto v : cur)
            for (uint32_t i = 0; i < g.vertex(v).child_count; ++i) next.push_back(g.vertex(v).first_child + i);
        cur.swap(next);
    }
    std::sort(cur.begin(), cur.end());
    Rational dn(1);
    for (int k = 0; k < n; ++k) dn = dn * Rational(g.spec().degree);
    AtomicMeasure m;
    m.level = static_cast<int>(g.level(xi)) + n;
    for (auto v : cur) {
        Rational x = Rational(static_cast<int64_t>(g.vertex(v).degree / g.vertex(xi).degree)) / dn;
        m.support.push_back(v);
        m.exact.push_back(x);
        m.mass.push_back(x.to_double());
    }
    return m;
}

namespace {

std::optional<uint32_t> shift_vertex(const GammaGraph& g, const std::vector<uint32_t>& itinerary, int N) {
    const SystemSpec& s = g.spec();
    CellAddress a;
    // cylinder [x_0 .. x_{N-1}]: root x_{N-1}, word read backwards
    if (s.elements.size() > 1) a.root = s.element_index(std::to_string(itinerary[static_cast<size_t>(N) - 1]));
    for (size_t i = static_cast<size_t>(N) - 1; i-- > 0;) a.word.push_back(static_cast<uint8_t>(itinerary[i]));
    return g.find(a);
}

}  // namespace

AtomicMeasure periodic_measure(const GammaGraph& g, int n, int N) {
    const SystemSpec& s = g.spec();
    require(n >= 1, "periodic_measure: period must be positive");
    require(N >= 1 && N <= g.depth(), "periodic_measure: level out of range");
    const int d = s.degree;
    double dn = std::pow(static_cast<double>(d), n);
    require(dn < 1e9, "periodic_measure: too many periodic points");
    auto count = static_cast<uint64_t>(dn);
    std::vector<std::pair<uint32_t, Rational>> atoms;
    Rational weight = Rational(1) / Rational(static_cast<int64_t>(count));
    if (s.backend == Backend::GeometricCircle) {
        for (uint64_t j = 0; j + 1 < count; ++j) {
            Rational x(static_cast<int64_t>(j), static_cast<int64_t>(count - 1));
            auto a = address_of(g, x);
            atoms.emplace_back(a.chain[static_cast<size_t>(N) - 1], weight);
        }
    } else if (s.family == "fullshift") {
        for (uint64_t j = 0; j < count; ++j) {
            std::vector<uint32_t> word(static_cast<size_t>(n));
            uint64_t t = j;
            for (int i = 0; i < n; ++i) {
                word[static_cast<size_t>(i)] = static_cast<uint32_t>(t % static_cast<uint64_t>(d));
                t /= static_cast<uint64_t>(d);
            }
            std::vector<uint32_t> it(static_cast<size_t>(N));
            for (int i = 0; i < N; ++i) it[static_cast<size_t>(i)] = word[static_cast<size_t>(i % n)];
            auto v = shift_vertex(g, it, N);
            if (!v) fail(ErrorKind::Internal, "periodic_measure: cylinder not in graph");
            atoms.emplace_back(*v, weight);
        }
    } else {
        fail(ErrorKind::Unsupported, "periodic points are only enumerated for circle and full-shift systems");
    }
    std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    AtomicMeasure m;
    m.level = N;
    for (const auto& [v, w] : atoms) {
        if (!m.support.empty() && m.support.back() == v) {
            m.exact.back() = m.exact.back() + w;
            m.mass.back() = m.exact.back().to_double();
        } else {
            m.support.push_back(v);
            m.exact.push_back(w);
            m.mass.push_back(w.to_double());
        }
    }
    return m;
}

double shadow_discrepancy(const GammaGraph& g, const AtomicMeasure& a, const AtomicMeasure& b, int level) {
    require(a.level && b.level, "shadow_discrepancy: measures must be level slices");
    double best = 0;
    for (uint32_t w = g.level_begin(level); w < g.level_end(level); ++w) {
        auto sh = shadow(g, w, 1);
        best = std::max(best, std::abs(a.measure_of(sh.at_level(*a.level)) - b.measure_of(sh.at_level(*b.level))));
    }
    return best;
}

EquidistributionReport equidistribution(const GammaGraph& g, uint32_t xi, int n_lo, int n_hi, int periodic_n,
                                        int shadow_level) {
    require(shadow_level >= 1 && shadow_level <= g.depth(), "equidistribution: shadow level out of range");
    EquidistributionReport r;
    r.xi = xi;
    r.shadow_level = shadow_level;
    auto mu = mu_f_proxy(g, g.depth());
    for (int n = n_lo; n <= n_hi; ++n) {
        auto pm = preimage_measure(g, xi, n);
        double sup = shadow_discrepancy(g, pm, mu, shadow_level);
        if (!r.preimage_sup.empty() && sup > r.preimage_sup.back() + 1e-12) r.monotone = false;
        r.n_values.push_back(n);
        r.preimage_sup.push_back(sup);
    }
    r.periodic_n = periodic_n;
    if (periodic_n > 0) {
        try {
            auto per = periodic_measure(g, periodic_n, g.depth());
            r.periodic_supported = true;
            r.periodic_sup = shadow_discrepancy(g, per, mu, shadow_level);
            r.periodic_mass = per.exact_total()->str();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Unsupported) throw;
        }
    }
    return r;
}

Json EquidistributionReport::to_json(const GammaGraph& g) const {
    Json j;
    j["xi"] = g.label(xi);
    j["shadow_level"] = shadow_level;
    j["n"] = n_values;
    j["preimage_sup"] = preimage_sup;
    j["monotone_nonincreasing"] = monotone;
    if (periodic_n > 0) {
        if (periodic_supported)
            j["periodic"] = Json{{"n", periodic_n}, {"sup", periodic_sup}, {"total_mass", periodic_mass}};
        else
            j["periodic"] = Json{{"n", periodic_n}, {"supported", false}};
    }
    return j;
}

EntropyReport entropy_report(const GammaGraph& g, const MetricParams& p, double tolerance) {
    const int N = g.depth();
    require(N >= 2, "entropy_report: depth must be at least 2");
    const double logd = std::log(static_cast<double>(g.spec().degree));
    EntropyReport r;
    for (int n = 0; n <= N; ++n) r.sphere_sizes.push_back(g.sphere_size(n));
    // least squares slope of log|S(n)| on the top half of levels
    int lo = std::max(1, N - (N + 1) / 2 + 1);
    if (N - lo < 1) lo = std::max(1, N - 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int n = lo; n <= N; ++n) {
        double y = std::log(static_cast<double>(g.sphere_size(n)));
        sx += n;
        sy += y;
        sxx += static_cast<double>(n) * n;
        sxy += n * y;
        ++cnt;
    }
    r.v_estimate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    auto mu = mu_f_proxy(g, N);
    double integral = 0;
    for (size_t i = 0; i < mu.support.size(); ++i) integral += mu.mass[i] * std::log(static_cast<double>(g.vertex(mu.support[i]).local_degree));
    r.integral_log_dF = integral;
    r.lower_bound = logd - integral;
    r.upper = logd;
    r.alpha = logd / p.epsilon;
    r.dim_lower = r.lower_bound / p.epsilon;
    r.dim_upper = r.v_estimate / p.epsilon;
    r.chain_ok = r.lower_bound <= r.v_estimate + tolerance && r.v_estimate <= r.upper + tolerance && r.lower_bound >= 0;
    return r;
}

Json EntropyReport::to_json() const {
    Json j;
    j["v_estimate"] = v_estimate;
    j["lower_bound"] = lower_bound;
    j["upper"] = upper;
    j["integral_log_dF"] = integral_log_dF;
    j["alpha"] = alpha;
    j["dimension_bounds"] = {dim_lower, dim_upper};
    j["chain_ok"] = chain_ok;
    j["sphere_sizes"] = sphere_sizes;
    return j;
}

}  // namespace cxc
