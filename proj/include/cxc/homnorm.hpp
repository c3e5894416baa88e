#pragma once

#include "cxc/json_io.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

namespace cxc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Parses "3,0;0,4" (rows separated by ';').
Mat parse_matrix(const std::string& text);

/// Φ = M exp(φ) with M² = I commuting with Φ.
struct ExpandingMap {
    Mat phi_map;
    Mat phi;  // generator
    Mat m;    // sign fix
    std::vector<std::complex<double>> eigenvalues;
    /// log of the eigenvalue moduli, ascending.
    std::vector<double> lambdas;
    bool sign_fixed = false;
};

ExpandingMap decompose(const Mat& phi_map);

/// Homogeneous norm |v| = exp(-power * t(v)) where ||exp(φ t) v||_G = 1.
/// With power = 1 this is the one-parameter convention |Φv| = e|v|.
class HomogeneousNorm {
public:
    HomogeneousNorm() = default;
    HomogeneousNorm(ExpandingMap map, Mat gram, double power);

    const ExpandingMap& map() const { return map_; }
    const Mat& gram() const { return gram_; }
    int dim() const { return static_cast<int>(gram_.rows()); }
    double power() const { return power_; }
    /// |Φv| = factor |v|.
    double factor() const;
    /// Smallest eigenvalue of sym(Gφ) relative to G: d/dt log||e^{φt}v||_G >= this.
    double certificate() const { return certificate_; }
    bool standard_basis() const { return standard_; }

    double t_of(const Vec& v) const;
    double operator()(const Vec& v) const;
    Vec flow(const Vec& v, double t) const;  // exp(φ t) v
    /// Dilation with |dilate(v, s)| = s |v| (s > 0).
    Vec dilate(const Vec& v, double s) const;
    double g_norm(const Vec& v) const;
    HomogeneousNorm with_power(double p) const;

private:
    ExpandingMap map_;
    Mat gram_;
    double power_ = 1.0;
    Mat sym_;  // sym(Gφ)
    double certificate_ = 0;
    double slope_max_ = 0;
    bool standard_ = false;
    // exp(φt) = V diag(e^{μt}) V^{-1} when diagonalizable and well conditioned
    bool diagonal_ = false;
    bool eig_fast_ = false;
    Eigen::MatrixXcd vecs_, vecs_inv_;
    Eigen::VectorXcd mus_;
};

/// Φ must have every eigenvalue modulus > 1 (margin 1e-9).
HomogeneousNorm build_norm(const Mat& phi_map, double power = 1.0);

struct MonotonicityReport {
    size_t samples = 0;
    size_t grid_points = 0;
    size_t violations = 0;
    double min_slope = 0;
};
MonotonicityReport check_monotonicity(const HomogeneousNorm& n, size_t samples, uint64_t seed);

struct HomothetyReport {
    size_t samples = 0;
    double max_rel_error = 0;       // |Φ_t v| vs e^{power t}|v|
    double max_map_rel_error = 0;   // |Φv| vs factor |v|
    double max_symmetry_error = 0;  // |-v| vs |v|
    bool nondegenerate = true;
    bool proper = true;
};
HomothetyReport check_homothety(const HomogeneousNorm& n, size_t samples, uint64_t seed);

/// max{|x|, |y|^λ}, λ = log 3 / log 4.
double baby_norm(const Vec& v);
double baby_lambda();

enum class GroupOp { Abelian, Heisenberg };
const char* group_name(GroupOp g);
GroupOp parse_group(const std::string& s);
Vec group_mul(GroupOp g, const Vec& a, const Vec& b);
Vec group_inv(GroupOp g, const Vec& a);

/// A norm with its dilations (|dilate(v, s)| = s|v|).
struct NormView {
    int dim = 2;
    std::function<double(const Vec&)> norm;
    std::function<Vec(const Vec&, double)> dilate;
};
NormView view_of(const HomogeneousNorm& n);
NormView baby_view();

struct QReport {
    double q = 0;
    double q_coarse = 0;  // same search at half resolution
    /// sup |x y| over max{|x|, |y|} = 1: ϱ(x,z) <= C max{ϱ(x,y), ϱ(y,z)}.
    double ultra = 0;
    double ultra_coarse = 0;
    double refinement_gain = 0;
    int resolution = 0;
    Json to_json() const;
};

/// sup |x y| over |x| + |y| = 1 by grid search plus local refinement, and the
/// quasi-ultrametric constant by the same search.
QReport quasi_triangle_q(const NormView& n, GroupOp g, int resolution = 48);

struct ChainEval {
    Vec x, y;
    double rho = 0;     // |x^{-1} y|^ε
    double d_hat = 0;   // best chain found
    double floor = 0;   // (3 - 2 C^ε) rho
    size_t links = 1;
};

struct ChainMetric {
    NormView norm;
    GroupOp group = GroupOp::Abelian;
    double epsilon = 0.3;
    double c = 1;  // quasi-ultrametric constant of |.|
    int depth = 6;

    double rho(const Vec& x, const Vec& y) const;
    ChainEval eval(const Vec& x, const Vec& y) const;
};

/// Throws Validation when C^ε >= √2, naming the admissible ε bound.
ChainMetric chain_metric(const NormView& n, GroupOp g, double epsilon, double c, int depth = 6);

struct TorusReport {
    size_t pairs = 0;
    size_t skipped = 0;
    double delta = 0;
    double rho = 3;
    double max_ratio_error = 0;
    Json to_json() const;
};

/// Injectivity scale for the baby torus pairs.
double torus_delta();
double torus_distance(const Vec& x, const Vec& y);
/// x -> Φx mod Z² with Φ = diag(3, 4).
Vec torus_map(const Vec& x);
TorusReport torus_homothety_check(const std::vector<std::pair<Vec, Vec>>& pairs);
std::vector<std::pair<Vec, Vec>> random_close_pairs(size_t count, uint64_t seed);

/// (λ_1 + ... + λ_n) / λ_1; informational.
double conformal_dimension(const ExpandingMap& m);

struct HomnormOptions {
    double epsilon = 0.3;
    size_t samples = 10000;
    uint64_t seed = 7;
    GroupOp group = GroupOp::Abelian;
    int q_resolution = 48;
    size_t chain_pairs = 64;
    int chain_depth = 6;
};

Json homnorm_report(const Mat& phi_map, const HomnormOptions& opt);

}  // namespace cxc
