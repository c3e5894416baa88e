#pragma once

#include "cxc/hypmetric.hpp"

#include <optional>
#include <vector>

namespace cxc {

struct AtomicMeasure {
    std::vector<uint32_t> support;  // sorted vertex ids
    std::vector<double> mass;
    std::vector<Rational> exact;  // parallel to mass when masses are rational
    std::optional<int> level;
    double tail = 0;

    double total() const;
    std::optional<Rational> exact_total() const;
    bool is_probability() const;
    /// Mass of the atoms lying in a sorted vertex set.
    double measure_of(const std::vector<uint32_t>& set) const;
    Json to_json(const GammaGraph& g, bool atoms = true) const;
    std::string to_csv(const GammaGraph& g) const;
};

struct PoincareResult {
    double closed = 0;
    double truncated = 0;
    int terms = 0;
    double difference = 0;
};

/// |S(1)| sum_{n>=1} d^{n-1} e^{-ns}; closed form and adaptive truncated sum.
PoincareResult poincare_series(uint64_t s1, int d, double s, int min_terms = 60);
PoincareResult poincare_series(const GammaGraph& g, double s);

AtomicMeasure mu_s(const GammaGraph& g, double s);
AtomicMeasure mu_f_proxy(const GammaGraph& g, int N);
/// F_* of the level n+1 slice equals the level n slice, exactly, for every level.
bool check_pushforward(const GammaGraph& g);

struct ShadowLemmaReport {
    double alpha = 0;
    double min_ratio = 0;
    double max_ratio = 0;
    double window = 0;  // C with all ratios in [1/C, C]
    uint64_t vertices = 0;
    std::vector<int> levels;
    std::vector<double> level_min, level_max;
    Json to_json() const;
};

ShadowLemmaReport shadow_lemma_ratios(const GammaGraph& g, const MetricParams& p, int N);

AtomicMeasure preimage_measure(const GammaGraph& g, uint32_t xi, int n);
AtomicMeasure periodic_measure(const GammaGraph& g, int n, int N);

/// sup over W in S(level) of |a(shadow W) - b(shadow W)|, evaluated on the atoms' own levels.
double shadow_discrepancy(const GammaGraph& g, const AtomicMeasure& a, const AtomicMeasure& b, int level);

struct EquidistributionReport {
    uint32_t xi = 0;
    int shadow_level = 3;
    std::vector<int> n_values;
    std::vector<double> preimage_sup;
    bool monotone = true;
    int periodic_n = 0;
    double periodic_sup = 0;
    std::string periodic_mass;
    bool periodic_supported = false;
    Json to_json(const GammaGraph& g) const;
};

EquidistributionReport equidistribution(const GammaGraph& g, uint32_t xi, int n_lo, int n_hi, int periodic_n,
                                        int shadow_level = 3);

struct EntropyReport {
    double v_estimate = 0;
    double lower_bound = 0;
    double upper = 0;
    double alpha = 0;
    double dim_lower = 0;
    double dim_upper = 0;
    double integral_log_dF = 0;
    bool chain_ok = true;
    std::vector<uint64_t> sphere_sizes;
    Json to_json() const;
};

EntropyReport entropy_report(const GammaGraph& g, const MetricParams& p, double tolerance = 0.05);

}  // namespace cxc
