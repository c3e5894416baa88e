#pragma once

#include "cxc/hypmetric.hpp"

#include <string>
#include <vector>

namespace cxc {

enum class Verdict { Pass, Fail, Inconclusive, Growing, Unsupported };
const char* verdict_name(Verdict v);

/// Geometric cell diameters cached per vertex.
class DiameterCache {
public:
    explicit DiameterCache(const GammaGraph& g) : g_(g), d_(g.vertex_count(), -1.0) {}
    double operator()(uint32_t v);

private:
    const GammaGraph& g_;
    std::vector<double> d_;
};

struct ExpansionReport {
    Verdict verdict = Verdict::Fail;
    std::string metric;  // "geometric" or "visual-shadow"
    std::vector<int> levels;
    std::vector<double> c_n, d_n;
    double theta = 0;
    double c_prime = 0;
    Json to_json() const;
};
ExpansionReport check_expansion(const GammaGraph& g, const MetricParams& p);

struct IrreducibilityReport {
    Verdict verdict = Verdict::Inconclusive;
    int witness = -1;
    std::vector<std::vector<std::string>> reach;  // per root, S(1) labels reached at the last level tried
    Json to_json() const;
};
IrreducibilityReport check_irreducibility(const GammaGraph& g);

struct DegreeReport {
    Verdict verdict = Verdict::Fail;
    uint64_t p = 0;
    std::vector<uint64_t> max_degree;  // levels 1..N
    std::vector<uint64_t> branched;    // vertices with d(W) > 1 per level
    double growth_ratio = 1;
    std::string advisory;
    Json to_json() const;
};
DegreeReport check_degree(const GammaGraph& g);

struct RoundnessReport {
    Verdict verdict = Verdict::Unsupported;
    int denominator = 16;
    std::vector<int> levels;
    std::vector<double> level_K;
    double K = 0;
    double min_round = 0;
    uint64_t samples = 0;
    std::vector<std::pair<double, double>> rho_plus, rho_minus;  // envelope breakpoints
    Json to_json() const;
};
/// Round(A, a) = L/l for an arc on R/Z.
double arc_roundness(const Rational& lo, const Rational& hi, const Rational& a);
RoundnessReport roundness_distortion(const GammaGraph& g, int denominator = 16);

struct DiameterDistortionReport {
    Verdict verdict = Verdict::Unsupported;
    uint64_t pairs = 0;
    double max_log_gap = 0;  // max |log(lift ratio / base ratio)|
    std::vector<std::pair<double, double>> delta_plus, delta_minus;
    bool increasing = true;
    Json to_json() const;
};
DiameterDistortionReport diameter_distortion(const GammaGraph& g, DiameterCache& diam, int max_level = -1);

struct DoublingReport {
    std::vector<int> levels;
    std::vector<uint64_t> max_cover;
    std::vector<std::string> max_cover_at;
    std::vector<uint64_t> branch_cover;  // cover number at the vertex of largest d(W)
    std::vector<std::string> branch_vertex;
    bool growth = false;
    Json to_json() const;
};
DoublingReport doubling_probe(const GammaGraph& g, int N);

struct ComparabilityReport {
    Verdict verdict = Verdict::Unsupported;
    double C = 0;
    double min_ratio = 0, max_ratio = 0;
    uint64_t pairs = 0;
    Json to_json() const;
};
ComparabilityReport local_comparability(const GammaGraph& g, DiameterCache& diam);

struct LebesgueReport {
    Verdict verdict = Verdict::Unsupported;
    std::vector<int> levels;
    std::vector<double> delta_n, ratio_to_mesh;
    Json to_json() const;
};
LebesgueReport lebesgue_numbers(const GammaGraph& g);

struct AxiomReport {
    ExpansionReport expansion;
    IrreducibilityReport irreducibility;
    DegreeReport degree;
    RoundnessReport roundness;
    DiameterDistortionReport diameter;
    DoublingReport doubling;
    ComparabilityReport comparability;
    LebesgueReport lebesgue;
    Json to_json() const;
};
AxiomReport check_axioms(const GammaGraph& g, const MetricParams& p, int denominator = 16);

}  // namespace cxc
