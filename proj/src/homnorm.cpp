#include "cxc/homnorm.hpp"

#include "cxc/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cxc {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

double rel_err(double got, double want) {
    double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

// Newton iteration for the matrix sign function.
Mat matrix_sign(const Mat& a) {
    Mat x = a;
    for (int it = 0; it < 100; ++it) {
        Mat next = 0.5 * (x + x.inverse());
        double change = (next - x).norm() / std::max(1.0, next.norm());
        x = next;
        if (change < 1e-15) break;
    }
    return x;
}

std::pair<double, double> generalized_range(const Mat& s, const Mat& g) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(s, g);
    if (es.info() != Eigen::Success) return {-1.0, -1.0};
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

Mat parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) {
        std::vector<double> r;
        std::stringstream rs(row);
        std::string cell;
        while (std::getline(rs, cell, ',')) {
            try {
                size_t pos = 0;
                r.push_back(std::stod(cell, &pos));
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                require(pos == cell.size(), "bad matrix entry '" + cell + "'");
            } catch (const std::invalid_argument&) {
                fail(ErrorKind::Validation, "bad matrix entry '" + cell + "'");
            } catch (const std::out_of_range&) {
                fail(ErrorKind::Validation, "matrix entry out of range '" + cell + "'");
            }
        }
        rows.push_back(std::move(r));
    }
    require(!rows.empty(), "empty matrix");
    const size_t n = rows.size();
    for (const auto& r : rows) require(r.size() == n, "matrix must be square (rows separated by ';')");
    Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

ExpandingMap decompose(const Mat& phi_map) {
    require(phi_map.rows() == phi_map.cols() && phi_map.rows() > 0, "matrix must be square");
    require(phi_map.allFinite(), "matrix has non-finite entries");
    const auto n = phi_map.rows();
    ExpandingMap e;
    e.phi_map = phi_map;
    Eigen::EigenSolver<Mat> es(phi_map);
    require(es.info() == Eigen::Success, "eigenvalue computation failed");
    bool negative_real = false, imaginary_axis = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto mu = es.eigenvalues()(i);
        double r = std::abs(mu);
        if (!(r > 1.0 + 1e-9))
            fail(ErrorKind::Validation, "eigenvalue on or inside the unit circle (|mu| = " + format_real(r) + ")");
        e.eigenvalues.push_back(mu);
        e.lambdas.push_back(std::log(r));
        if (std::abs(mu.imag()) <= 1e-9 * r && mu.real() < 0) negative_real = true;
        if (std::abs(mu.real()) <= 1e-9 * r) imaginary_axis = true;
    }
    std::sort(e.lambdas.begin(), e.lambdas.end());
    e.m = Mat::Identity(n, n);
    if (negative_real) {
        if (imaginary_axis)
            fail(ErrorKind::Unsupported, "negative real eigenvalues together with eigenvalues on the imaginary axis");
        e.m = matrix_sign(phi_map);
        e.sign_fixed = true;
        if ((e.m * e.m - Mat::Identity(n, n)).norm() > 1e-9 || (e.m * phi_map - phi_map * e.m).norm() > 1e-9 * phi_map.norm())
            fail(ErrorKind::Internal, "sign factor check failed");
        // entries are eigenprojector combinations; clean rounding noise
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (std::abs(e.m(i, j) - std::round(e.m(i, j))) < 1e-12) e.m(i, j) = std::round(e.m(i, j));
    }
    Mat positive = e.m * phi_map;
    e.phi = positive.log();
    double scale = std::max(1.0, positive.norm());
    if (!e.phi.allFinite() || (Mat(e.phi.exp()) - positive).norm() > 1e-10 * scale)
        fail(ErrorKind::Internal, "matrix logarithm check failed");
    return e;
}

HomogeneousNorm::HomogeneousNorm(ExpandingMap map, Mat gram, double power)
    : map_(std::move(map)), gram_(std::move(gram)), power_(power) {
    const auto n = gram_.rows();
    sym_ = 0.5 * (map_.phi.transpose() * gram_ + gram_ * map_.phi);
    std::tie(certificate_, slope_max_) = generalized_range(sym_, gram_);
    standard_ = (gram_ - Mat::Identity(n, n)).norm() < 1e-14;
    Mat off = map_.phi;
    off.diagonal().setZero();
    diagonal_ = off.norm() == 0.0;
    if (!diagonal_) {
        Eigen::EigenSolver<Mat> es(map_.phi);
        if (es.info() == Eigen::Success) {
            vecs_ = es.eigenvectors();
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(vecs_);
            if (lu.isInvertible()) {
                vecs_inv_ = lu.inverse();
                double cond = vecs_.norm() * vecs_inv_.norm();
                mus_ = es.eigenvalues();
                eig_fast_ = cond < 1e6;
            }
        }
    }
}

double HomogeneousNorm::factor() const { return std::exp(power_); }

HomogeneousNorm HomogeneousNorm::with_power(double p) const {
    require(p > 0, "norm power must be positive");
    HomogeneousNorm h = *this;
    h.power_ = p;
    return h;
}

Vec HomogeneousNorm::flow(const Vec& v, double t) const {
    if (diagonal_) {
        Vec w = v;
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) *= std::exp(map_.phi(i, i) * t);
        return w;
    }
    if (eig_fast_) {
        Eigen::VectorXcd c = vecs_inv_ * v.cast<std::complex<double>>();
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(mus_(i) * t);
        return (vecs_ * c).real();
    }
    Mat a = map_.phi * t;
    return Mat(a.exp()) * v;
}

double HomogeneousNorm::g_norm(const Vec& v) const { return std::sqrt(std::max(0.0, v.dot(gram_ * v))); }

double HomogeneousNorm::t_of(const Vec& v) const {
    double g0 = g_norm(v);
    if (g0 == 0.0) return std::numeric_limits<double>::infinity();
    const Mat& s = sym_;
    const double cmin = certificate_, cmax = slope_max_;
    double f0 = std::log(g0);
    // f(t) = log||e^{φt}v||_G has slope in [cmin, cmax]
    double lo, hi;
    if (f0 > 0) {
        lo = -f0 / cmin;
        hi = -f0 / cmax;
    } else {
        lo = -f0 / cmax;
        hi = -f0 / cmin;
    }
    double pad = 1e-9 * std::max(1.0, std::abs(lo) + std::abs(hi));
    lo -= pad;
    hi += pad;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        Vec w = flow(v, t);
        double gw = w.dot(gram_ * w);
        double f = 0.5 * std::log(gw);
        if (f > 0) hi = t;
        else lo = t;
        double slope = w.dot(s * w) / gw;
        double next = t - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

double HomogeneousNorm::operator()(const Vec& v) const {
    double t = t_of(v);
    if (std::isinf(t)) return 0.0;
    return std::exp(-power_ * t);
}

Vec HomogeneousNorm::dilate(const Vec& v, double s) const { return flow(v, std::log(s) / power_); }

HomogeneousNorm build_norm(const Mat& phi_map, double power) {
    require(power > 0, "norm power must be positive");
    ExpandingMap e = decompose(phi_map);
    const auto n = phi_map.rows();
    Mat id = Mat::Identity(n, n);
    Mat g = 0.5 * (id + e.m.transpose() * e.m);
    Mat s = 0.5 * (e.phi.transpose() * g + g * e.phi);
    if (!(generalized_range(s, g).first > 1e-9)) {
        // Lyapunov inner product: φᵀG + Gφ = I
        Mat k = Eigen::kroneckerProduct(id, e.phi.transpose()) + Eigen::kroneckerProduct(e.phi.transpose(), id);
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(id.data(), n * n);
        Eigen::VectorXd sol = k.fullPivLu().solve(rhs);
        g = Eigen::Map<Mat>(sol.data(), n, n);
        g = 0.5 * (g + g.transpose());
        g = 0.5 * (g + e.m.transpose() * g * e.m);
        double det = g.determinant();
        if (!(det > 0)) fail(ErrorKind::Internal, "monotonicity violation: inner product is not positive");
        g /= std::pow(det, 1.0 / static_cast<double>(n));
    }
    HomogeneousNorm h(std::move(e), std::move(g), power);
    if (!(h.certificate() > 1e-12))
        fail(ErrorKind::Internal, "monotonicity violation: t -> ||exp(phi t) v|| is not increasing");
    return h;
}

MonotonicityReport check_monotonicity(const HomogeneousNorm& n, size_t samples, uint64_t seed) {
    std::mt19937_64 rng(seed);
    MonotonicityReport r;
    r.samples = samples;
    r.min_slope = std::numeric_limits<double>::infinity();
    const double step = 0.05;
    for (size_t k = 0; k < samples; ++k) {
        Vec v = random_vector(rng, n.dim());
        double t0 = n.t_of(v);
        double prev = n.g_norm(n.flow(v, t0 - 3.0));
        for (int i = 1; i <= 120; ++i) {
            double g = n.g_norm(n.flow(v, t0 - 3.0 + step * i));
            ++r.grid_points;
            double slope = (std::log(g) - std::log(prev)) / step;
            r.min_slope = std::min(r.min_slope, slope);
            if (!(g > prev)) ++r.violations;
            prev = g;
        }
    }
    return r;
}

HomothetyReport check_homothety(const HomogeneousNorm& n, size_t samples, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> scale(-3.0, 3.0), tt(-2.0, 2.0);
    HomothetyReport r;
    r.samples = samples;
    if (n(Vec::Zero(n.dim())) != 0.0) r.nondegenerate = false;
    for (size_t k = 0; k < samples; ++k) {
        Vec v = random_vector(rng, n.dim()) * std::exp(scale(rng));
        double t = tt(rng);
        double nv = n(v);
        if (!(nv > 0)) r.nondegenerate = false;
        r.max_rel_error = std::max(r.max_rel_error, rel_err(n(n.flow(v, t)), std::exp(n.power() * t) * nv));
        r.max_map_rel_error = std::max(r.max_map_rel_error, rel_err(n(n.map().phi_map * v), n.factor() * nv));
        r.max_symmetry_error = std::max(r.max_symmetry_error, rel_err(n(-v), nv));
        if (k < 100) {
            double a = n(v * 1e3), b = n(v * 1e6);
            if (!(b > a && a > nv)) r.proper = false;
        }
    }
    return r;
}

double baby_lambda() { return std::log(3.0) / std::log(4.0); }

double baby_norm(const Vec& v) {
    require(v.size() == 2, "baby norm is defined on R^2");
    return std::max(std::abs(v(0)), std::pow(std::abs(v(1)), baby_lambda()));
}

const char* group_name(GroupOp g) { return g == GroupOp::Abelian ? "abelian" : "heisenberg"; }

GroupOp parse_group(const std::string& s) {
    if (s == "abelian") return GroupOp::Abelian;
    if (s == "heisenberg") return GroupOp::Heisenberg;
    fail(ErrorKind::Validation, "group must be abelian or heisenberg, got '" + s + "'");
}

// Heisenberg product in the symmetric convention z'' = z + z' + (x y' - y x') / 2.
Vec group_mul(GroupOp g, const Vec& a, const Vec& b) {
    Vec c = a + b;
    if (g == GroupOp::Heisenberg) c(2) += 0.5 * (a(0) * b(1) - a(1) * b(0));
    return c;
}

Vec group_inv(GroupOp, const Vec& a) { return -a; }

NormView view_of(const HomogeneousNorm& n) {
    auto p = std::make_shared<HomogeneousNorm>(n);
    return {n.dim(), [p](const Vec& v) { return (*p)(v); }, [p](const Vec& v, double s) { return p->dilate(v, s); }};
}

NormView baby_view() {
    return {2, [](const Vec& v) { return baby_norm(v); },
            [](const Vec& v, double s) {
                Vec w(2);
                w(0) = s * v(0);
                w(1) = std::pow(s, 1.0 / baby_lambda()) * v(1);
                return w;
            }};
}

namespace {

Vec direction(int dim, const std::vector<double>& ang) {
    Vec w(dim);
    if (dim == 1) {
        w(0) = ang[0] < 0.5 ? 1.0 : -1.0;
    } else if (dim == 2) {
        w(0) = std::cos(ang[0]);
        w(1) = std::sin(ang[0]);
    } else {
        // spherical coordinates, first two angles; extra coordinates unused beyond 3
        w.setZero();
        w(0) = std::sin(ang[1]) * std::cos(ang[0]);
        w(1) = std::sin(ang[1]) * std::sin(ang[0]);
        w(2) = std::cos(ang[1]);
    }
    return w;
}

int angle_count(int dim) { return dim == 1 ? 1 : dim == 2 ? 1 : 2; }

struct QSearch {
    const NormView& n;
    GroupOp g;
    // false: |x| + |y| = 1; true: |x| = 1 >= |y|
    bool ultra = false;

    Vec on_sphere(const Vec& w, double a) const {
        double nw = n.norm(w);
        return n.dilate(w, a / nw);
    }

    // params: angles of x, angles of y, a
    double value(const std::vector<double>& p) const {
        int k = angle_count(n.dim);
        double a = std::clamp(p.back(), 0.0, 1.0);
        std::vector<double> ax(p.begin(), p.begin() + k), ay(p.begin() + k, p.begin() + 2 * k);
        Vec zero = Vec::Zero(n.dim);
        if (ultra) {
            Vec x = on_sphere(direction(n.dim, ax), 1.0);
            Vec y = a > 0 ? on_sphere(direction(n.dim, ay), a) : zero;
            return n.norm(group_mul(g, x, y));
        }
        Vec x = a > 0 ? on_sphere(direction(n.dim, ax), a) : zero;
        Vec y = a < 1 ? on_sphere(direction(n.dim, ay), 1.0 - a) : zero;
        return n.norm(group_mul(g, x, y));
    }
};

struct GridMax {
    double best = 0;
    std::vector<std::pair<double, std::vector<double>>> top;
};

GridMax grid_search(const QSearch& qs, int res, size_t keep) {
    const int dim = qs.n.dim;
    std::vector<std::vector<double>> dirs;
    if (dim == 1) {
        dirs = {{0.0}, {1.0}};
    } else if (dim == 2) {
        for (int i = 0; i < res; ++i) dirs.push_back({2 * kPi * i / res});
    } else {
        int rt = std::max(4, res / 3), rp = std::max(2, res / 6);
        dirs.push_back({0.0, 0.0});
        dirs.push_back({0.0, kPi});
        for (int i = 0; i < rt; ++i)
            for (int j = 1; j < rp; ++j) dirs.push_back({2 * kPi * i / rt, kPi * j / rp});
    }
    int na = dim >= 3 ? std::max(4, res / 6) : res / 2;
    GridMax gm;
    std::vector<std::pair<double, std::vector<double>>> all;
    for (const auto& dx : dirs)
        for (const auto& dy : dirs)
            for (int ia = 0; ia <= na; ++ia) {
                std::vector<double> p = dx;
                p.insert(p.end(), dy.begin(), dy.end());
                p.push_back(static_cast<double>(ia) / na);
                double v = qs.value(p);
                all.push_back({v, std::move(p)});
            }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    gm.best = all.front().first;
    for (size_t i = 0; i < all.size() && gm.top.size() < keep; ++i) gm.top.push_back(all[i]);
    return gm;
}

double refine(const QSearch& qs, std::vector<double> p, double v, double step) {
    const size_t k = p.size();
    while (step > 1e-7) {
        bool moved = false;
        for (size_t i = 0; i < k; ++i)
            for (double sgn : {1.0, -1.0}) {
                auto q = p;
                q[i] += sgn * step;
                if (i + 1 == k) q[i] = std::clamp(q[i], 0.0, 1.0);
                double w = qs.value(q);
                if (w > v) {
                    v = w;
                    p = std::move(q);
                    moved = true;
                }
            }
        if (!moved) step *= 0.5;
    }
    return v;
}

}  // namespace

QReport quasi_triangle_q(const NormView& n, GroupOp g, int resolution) {
    require(resolution >= 8, "Q resolution must be at least 8");
    require(g == GroupOp::Abelian || n.dim == 3, "Heisenberg group needs dimension 3");
    require(n.dim <= 3, "Q search supports dimension at most 3");
    double step = 2 * kPi / resolution;
    auto search = [&](bool ultra, int res, double st) {
        QSearch qs{n, g, ultra};
        auto gm = grid_search(qs, res, 8);
        double best = gm.best;
        for (const auto& [v, p] : gm.top) best = std::max(best, refine(qs, p, v, st));
        return std::pair{gm.best, best};
    };
    QReport r;
    r.resolution = resolution;
    auto [grid_best, q] = search(false, resolution, step);
    r.q = q;
    r.q_coarse = search(false, resolution / 2, 2 * step).second;
    r.ultra = search(true, resolution, step).second;
    r.ultra_coarse = search(true, resolution / 2, 2 * step).second;
    r.refinement_gain = r.q - grid_best;
    return r;
}

Json QReport::to_json() const {
    return {{"Q", q},
            {"Q_half_resolution", q_coarse},
            {"ultrametric_constant", ultra},
            {"ultrametric_constant_half_resolution", ultra_coarse},
            {"refinement_gain", refinement_gain},
            {"resolution", resolution},
            {"numeric_lower_estimate", true}};
}

double ChainMetric::rho(const Vec& x, const Vec& y) const {
    return std::pow(norm.norm(group_mul(group, group_inv(group, x), y)), epsilon);
}

ChainEval ChainMetric::eval(const Vec& x, const Vec& y) const {
    ChainEval e;
    e.x = x;
    e.y = y;
    e.rho = rho(x, y);
    e.floor = (3.0 - 2.0 * std::pow(std::max(c, 1.0), epsilon)) * e.rho;
    if (e.rho == 0.0) {
        e.d_hat = 0.0;
        return e;
    }
    std::vector<Vec> chain{x, y};
    std::vector<double> cost{e.rho};
    for (int pass = 0; pass < depth; ++pass) {
        std::vector<Vec> nc{chain.front()};
        std::vector<double> ncost;
        bool any = false;
        for (size_t i = 0; i + 1 < chain.size(); ++i) {
            const Vec& a = chain[i];
            const Vec& b = chain[i + 1];
            Vec w = group_mul(group, group_inv(group, a), b);
            double best = cost[i];
            Vec best_m;
            double c1 = 0, c2 = 0;
            for (int kind = 0; kind < 2; ++kind)
                for (double s : {0.25, 0.5, 0.75}) {
                    Vec u = kind == 0 ? Vec(s * w) : norm.dilate(w, s);
                    Vec m = group_mul(group, a, u);
                    double r1 = rho(a, m), r2 = rho(m, b);
                    if (r1 + r2 < best * (1.0 - 1e-15)) {
                        best = r1 + r2;
                        best_m = m;
                        c1 = r1;
                        c2 = r2;
                    }
                }
            if (best_m.size() > 0) {
                any = true;
                nc.push_back(best_m);
                ncost.push_back(c1);
                ncost.push_back(c2);
            } else {
                ncost.push_back(cost[i]);
            }
            nc.push_back(b);
        }
        chain = std::move(nc);
        cost = std::move(ncost);
        if (!any) break;
    }
    e.links = cost.size();
    e.d_hat = 0;
    for (double c : cost) e.d_hat += c;
    return e;
}

ChainMetric chain_metric(const NormView& n, GroupOp g, double epsilon, double c, int depth) {
    require(epsilon > 0, "epsilon must be positive");
    require(depth >= 0 && depth <= 16, "chain depth must be in [0, 16]");
    require(g == GroupOp::Abelian || n.dim == 3, "Heisenberg group needs dimension 3");
    if (c > 1.0 && std::pow(c, epsilon) >= std::sqrt(2.0))
        fail(ErrorKind::Validation, "epsilon too large: C^epsilon must be < sqrt(2) for the quasi-ultrametric "
                                    "constant C = " + format_real(c) + ", need epsilon < " +
                                        format_real(0.5 * std::log(2.0) / std::log(c)));
    return {n, g, epsilon, c, depth};
}

double torus_delta() { return 1.0 / 12.0; }

namespace {
Vec reduce(Vec d) {
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) -= std::floor(d(i) + 0.5);
    return d;
}
}  // namespace

double torus_distance(const Vec& x, const Vec& y) { return baby_norm(reduce(x - y)); }

Vec torus_map(const Vec& x) {
    Vec y(2);
    y(0) = 3.0 * x(0);
    y(1) = 4.0 * x(1);
    y(0) -= std::floor(y(0));
    y(1) -= std::floor(y(1));
    return y;
}

TorusReport torus_homothety_check(const std::vector<std::pair<Vec, Vec>>& pairs) {
    TorusReport r;
    r.delta = torus_delta();
    for (const auto& [x, y] : pairs) {
        require(x.size() == 2 && y.size() == 2, "torus points are in R^2");
        double d = torus_distance(x, y);
        if (d == 0.0) {
            ++r.skipped;
            continue;
        }
        if (d >= r.delta)
            fail(ErrorKind::Validation, "pair too far apart for an unambiguous lift (distance " + format_real(d) + ")");
        double ratio = torus_distance(torus_map(x), torus_map(y)) / d;
        r.max_ratio_error = std::max(r.max_ratio_error, std::abs(ratio - r.rho));
        ++r.pairs;
    }
    return r;
}

Json TorusReport::to_json() const {
    return {{"pairs", pairs}, {"skipped", skipped}, {"delta", delta}, {"rho", rho}, {"max_ratio_error", max_ratio_error}};
}

std::vector<std::pair<Vec, Vec>> random_close_pairs(size_t count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0), u11(-1.0, 1.0);
    const double delta = torus_delta();
    auto view = baby_view();
    std::vector<std::pair<Vec, Vec>> out;
    for (size_t k = 0; k < count; ++k) {
        Vec x(2);
        x << u01(rng), u01(rng);
        Vec s(2);
        if (u01(rng) < 0.5) s << (u01(rng) < 0.5 ? 1.0 : -1.0), u11(rng);
        else s << u11(rng), (u01(rng) < 0.5 ? 1.0 : -1.0);
        double r = delta * (0.1 + 0.89 * u01(rng));
        Vec y = x + view.dilate(s, r);
        y(0) -= std::floor(y(0));
        y(1) -= std::floor(y(1));
        out.push_back({x, y});
    }
    return out;
}

double conformal_dimension(const ExpandingMap& m) {
    double sum = 0;
    for (double l : m.lambdas) sum += l;
    return sum / m.lambdas.front();
}

namespace {

Json chain_section(const NormView& view, const Mat& phi_map, const HomnormOptions& opt, double c, double factor) {
    try {
        auto metric = chain_metric(view, opt.group, opt.epsilon, c, opt.chain_depth);
        std::mt19937_64 rng(opt.seed + 2);
        size_t below = 0, above = 0;
        double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0, max_hom = 0;
        double want = std::pow(factor, opt.epsilon);
        for (size_t k = 0; k < opt.chain_pairs; ++k) {
            Vec a = random_vector(rng, view.dim), b = random_vector(rng, view.dim);
            auto ev = metric.eval(a, b);
            if (ev.d_hat < ev.floor * (1.0 - 1e-12)) ++below;
            if (ev.d_hat > ev.rho * (1.0 + 1e-12)) ++above;
            min_ratio = std::min(min_ratio, ev.d_hat / ev.rho);
            max_ratio = std::max(max_ratio, ev.d_hat / ev.rho);
            auto ev2 = metric.eval(phi_map * a, phi_map * b);
            max_hom = std::max(max_hom, rel_err(ev2.d_hat / ev.d_hat, want));
        }
        return {{"epsilon", opt.epsilon},
                {"floor_factor", 3.0 - 2.0 * std::pow(std::max(c, 1.0), opt.epsilon)},
                {"pairs", opt.chain_pairs},
                {"below_floor", below},
                {"above_rho", above},
                {"min_ratio", min_ratio},
                {"max_ratio", max_ratio},
                {"homothety_factor", want},
                {"max_homothety_rel_error", max_hom}};
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::Validation) throw;
        return {{"epsilon", opt.epsilon}, {"error", err.what()}};
    }
}

}  // namespace

Json homnorm_report(const Mat& phi_map, const HomnormOptions& opt) {
    require(opt.epsilon > 0, "epsilon must be positive");
    require(opt.samples > 0, "samples must be positive");
    auto norm = build_norm(phi_map);
    const auto& e = norm.map();
    if (opt.group == GroupOp::Heisenberg) {
        require(norm.dim() == 3, "Heisenberg group needs a 3x3 matrix");
        // Φ must be an automorphism: z-scale equals the xy-determinant
        Mat a = phi_map.topLeftCorner(2, 2);
        bool ok = phi_map.block(0, 2, 2, 1).norm() == 0 && phi_map.block(2, 0, 1, 2).norm() == 0 &&
                  std::abs(phi_map(2, 2) - a.determinant()) <= 1e-12 * std::abs(phi_map(2, 2));
        require(ok, "matrix is not a Heisenberg automorphism (need block diag(A, det A))");
    }
    Json j;
    j["schema"] = "v1";
    j["kind"] = "homnorm";
    Json mat = Json::array();
    for (Eigen::Index i = 0; i < phi_map.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < phi_map.cols(); ++k) row.push_back(phi_map(i, k));
        mat.push_back(row);
    }
    j["matrix"] = mat;
    j["group"] = group_name(opt.group);
    Json eig = Json::array();
    for (auto mu : e.eigenvalues) eig.push_back({{"re", mu.real()}, {"im", mu.imag()}, {"abs", std::abs(mu)}});
    j["eigenvalues"] = eig;
    j["lambdas"] = e.lambdas;
    j["sign_fixed"] = e.sign_fixed;
    Json mj = Json::array();
    for (Eigen::Index i = 0; i < e.m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < e.m.cols(); ++k) row.push_back(e.m(i, k));
        mj.push_back(row);
    }
    j["M"] = mj;
    j["standard_basis"] = norm.standard_basis();
    j["certificate"] = norm.certificate();

    auto mono = check_monotonicity(norm, std::max<size_t>(1, opt.samples / 50), opt.seed);
    j["monotonicity"] = {{"samples", mono.samples}, {"grid_points", mono.grid_points},
                         {"violations", mono.violations}, {"min_log_slope", mono.min_slope}};
    auto hom = check_homothety(norm, opt.samples, opt.seed + 1);
    j["homothety"] = {{"samples", hom.samples},          {"max_rel_error", hom.max_rel_error},
                      {"max_map_rel_error", hom.max_map_rel_error}, {"max_symmetry_error", hom.max_symmetry_error},
                      {"nondegenerate", hom.nondegenerate}, {"proper", hom.proper}};
    // the first-eigenvalue convention makes |Φv| = |mu_1| |v|
    double power = e.lambdas.front();

    if (norm.dim() <= 3) {
        Json conv = Json::array();
        for (auto [name, p] : {std::pair<const char*, double>{"one_parameter", 1.0}, {"eigen", power}}) {
            auto view = view_of(norm.with_power(p));
            auto q = quasi_triangle_q(view, opt.group, opt.q_resolution);
            Json c;
            c["convention"] = name;
            c["power"] = p;
            c["factor"] = std::exp(p);
            c["quasi_triangle"] = q.to_json();
            c["chain_metric"] = chain_section(view, phi_map, opt, q.ultra, std::exp(p));
            conv.push_back(c);
        }
        j["metrics"] = conv;
    }
    j["conformal_dimension"] = conformal_dimension(e);
    return j;
}

}  // namespace cxc
