#include "doctest.h"

#include "cxc/errors.hpp"
#include "cxc/homnorm.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace cxc;

namespace {

Mat rotation_block(double rho, double theta) {
    Mat m(2, 2);
    m << rho * std::cos(theta), -rho * std::sin(theta), rho * std::sin(theta), rho * std::cos(theta);
    return m;
}

Mat block_diag(const Mat& a, const Mat& b) {
    Mat m = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    m.topLeftCorner(a.rows(), a.cols()) = a;
    m.bottomRightCorner(b.rows(), b.cols()) = b;
    return m;
}

std::vector<Vec> samples(int dim, size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> s(-2, 2);
    std::vector<Vec> out;
    for (size_t k = 0; k < n; ++k) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = g(rng);
        out.push_back(v * std::exp(s(rng)));
    }
    return out;
}

}  // namespace

TEST_CASE("matrix parsing") {
    Mat m = parse_matrix("3,0;0,4");
    CHECK(m(0, 0) == 3);
    CHECK(m(1, 1) == 4);
    CHECK_THROWS_AS(parse_matrix("1,2;3"), Error);
    CHECK_THROWS_AS(parse_matrix("1,x;0,1"), Error);
}

TEST_CASE("2I gives a power of the Euclidean norm") {
    auto n = build_norm(parse_matrix("2,0;0,2"));
    for (const auto& v : samples(2, 200, 1)) {
        CHECK(n(v) == doctest::Approx(std::pow(v.norm(), 1 / std::log(2.0))).epsilon(1e-11));
        CHECK(n(2 * v) == doctest::Approx(std::exp(1.0) * n(v)).epsilon(1e-11));
    }
}

TEST_CASE("homothety of the homogeneous norm on 1e4 samples") {
    std::vector<Mat> maps{parse_matrix("3,0;0,4"), parse_matrix("2,0;0,2"), parse_matrix("-3,0;0,4"),
                          rotation_block(2, 0.7), block_diag(rotation_block(2, 0.3), rotation_block(3, 1.9)),
                          parse_matrix("2,1;0,2"), parse_matrix("0,-3;1,0")};
    for (const auto& m : maps) {
        auto n = build_norm(m);
        auto h = check_homothety(n, 10000, 5);
        CHECK(h.max_rel_error < 1e-9);
        CHECK(h.max_map_rel_error < 1e-9);
        CHECK(h.max_symmetry_error < 1e-9);
        CHECK(h.nondegenerate);
        CHECK(h.proper);
        CHECK(check_monotonicity(n, 200, 3).violations == 0);
    }
}

TEST_CASE("negative eigenvalues use the sign factor") {
    auto e = decompose(parse_matrix("-3,0;0,4"));
    CHECK(e.sign_fixed);
    CHECK(e.m(0, 0) == -1);
    CHECK(e.m(1, 1) == 1);
    CHECK(e.m(0, 1) == 0);
    Mat back = e.m * e.phi.exp();
    CHECK((back - parse_matrix("-3,0;0,4")).norm() < 1e-12);
}

TEST_CASE("non-expanding maps are rejected") {
    try {
        build_norm(parse_matrix("1,0;0,2"));
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
    }
    CHECK_THROWS_AS(build_norm(parse_matrix("0.5,0;0,3")), Error);
}

TEST_CASE("de-facto norm axioms on random samples") {
    auto n = build_norm(parse_matrix("3,1;0,4"));
    CHECK(n(Vec::Zero(2)) == 0.0);
    for (const auto& v : samples(2, 500, 9)) {
        CHECK(n(v) > 0);
        CHECK(n(-v) == doctest::Approx(n(v)).epsilon(1e-12));
        CHECK(n(v * 1e4) > n(v * 1e2));
    }
}

TEST_CASE("baby norm") {
    Vec a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    CHECK(baby_norm(a) == 1.0);
    CHECK(baby_norm(b) == 1.0);
    Mat phi = parse_matrix("3,0;0,4");
    double worst = 0;
    for (const auto& v : samples(2, 10000, 13)) worst = std::max(worst, std::abs(baby_norm(phi * v) / baby_norm(v) - 3));
    CHECK(worst < 1e-12);
}

TEST_CASE("quasi-triangle constants") {
    auto euclid = build_norm(Mat::Identity(2, 2) * std::exp(1.0));
    auto q1 = quasi_triangle_q(view_of(euclid), GroupOp::Abelian);
    CHECK(q1.q == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(q1.ultra == doctest::Approx(2.0).epsilon(1e-6));

    auto baby = quasi_triangle_q(baby_view(), GroupOp::Abelian, 64);
    CHECK(std::abs(baby.q - baby.q_coarse) < 1e-3);
    CHECK(baby.q >= 0.5);
    // x = y = (1, 0) is extremal: max{2, 2^λ}
    CHECK(baby.ultra == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(baby.ultra <= 2 * baby.q + 1e-12);

    for (const char* m : {"3,0;0,4", "2,1;0,2", "2,0;0,2"}) CHECK(quasi_triangle_q(view_of(build_norm(parse_matrix(m))), GroupOp::Abelian).q >= 0.5);

    // 2I: the extremum is at x = y, giving 2^(1/log 2 - 1)
    auto two = quasi_triangle_q(view_of(build_norm(parse_matrix("2,0;0,2"))), GroupOp::Abelian);
    CHECK(two.q == doctest::Approx(std::pow(2.0, 1 / std::log(2.0) - 1)).epsilon(1e-6));
    CHECK(two.ultra == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("chain metric sandwich") {
    auto view = baby_view();
    double c = quasi_triangle_q(view, GroupOp::Abelian).ultra;
    auto cm = chain_metric(view, GroupOp::Abelian, 0.3, c);
    Vec x(2);
    x << 0.2, 0.4;
    CHECK(cm.eval(x, x).d_hat == 0.0);
    for (const auto& v : samples(2, 200, 21)) {
        auto e = cm.eval(x, x + v);
        CHECK(e.d_hat <= e.rho * (1 + 1e-12));
        CHECK(e.d_hat >= e.floor * (1 - 1e-12));
    }
}

TEST_CASE("one-dimensional chains stay above the floor") {
    // |v| = |v|_2^(1/log 2) with C = e; eps = 0.3 keeps C^eps < sqrt 2
    auto n = build_norm(parse_matrix("2"));
    auto view = view_of(n);
    auto qr = quasi_triangle_q(view, GroupOp::Abelian);
    double eps = 0.3;
    REQUIRE(std::pow(qr.ultra, eps) < std::sqrt(2.0));
    auto cm = chain_metric(view, GroupOp::Abelian, eps, qr.ultra);
    for (const auto& v : samples(1, 300, 4)) {
        Vec x = Vec::Constant(1, 0.1);
        auto e = cm.eval(x, x + v);
        CHECK(e.d_hat <= e.rho * (1 + 1e-12));
        CHECK(e.d_hat >= e.floor * (1 - 1e-12));
    }
}

TEST_CASE("the sum-normalized constant alone does not bound chains") {
    // eps = 0.9: Q^eps < sqrt 2, yet k equal steps cost k^(1 - eps/log 2) rho -> 0
    auto view = view_of(build_norm(parse_matrix("2")));
    auto qr = quasi_triangle_q(view, GroupOp::Abelian);
    double eps = 0.9;
    REQUIRE(std::pow(qr.q, eps) < std::sqrt(2.0));
    Vec step = Vec::Constant(1, 1.0 / 64);
    double chain = 64 * std::pow(view.norm(step), eps);
    double rho = std::pow(view.norm(Vec::Constant(1, 1.0)), eps);
    CHECK(chain < (3 - 2 * std::pow(qr.q, eps)) * rho);
    CHECK_THROWS_AS(chain_metric(view, GroupOp::Abelian, eps, qr.ultra), Error);
}

TEST_CASE("epsilon too large for Q is rejected with the bound") {
    auto view = baby_view();
    double q = 1.5;
    try {
        chain_metric(view, GroupOp::Abelian, 2.0, q);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("need epsilon <") != std::string::npos);
    }
}

TEST_CASE("Heisenberg dilation is a homothety of the chain metric") {
    Mat phi = parse_matrix("2,0,0;0,2,0;0,0,4");
    auto base = build_norm(phi);
    auto n = base.with_power(std::log(2.0));
    CHECK(n.factor() == doctest::Approx(2.0));
    auto view = view_of(n);
    double c = quasi_triangle_q(view, GroupOp::Heisenberg, 24).ultra;
    auto cm = chain_metric(view, GroupOp::Heisenberg, 0.3, c, 4);
    auto pts = samples(3, 40, 17);
    for (size_t i = 0; i + 1 < pts.size(); i += 2) {
        auto a = cm.eval(pts[i], pts[i + 1]);
        auto b = cm.eval(phi * pts[i], phi * pts[i + 1]);
        CHECK(b.d_hat == doctest::Approx(std::pow(2.0, 0.3) * a.d_hat).epsilon(1e-9));
        CHECK(a.d_hat >= a.floor * (1 - 1e-12));
    }
    // group law sanity
    Vec x = pts[0], y = pts[1];
    Vec e = group_mul(GroupOp::Heisenberg, x, group_inv(GroupOp::Heisenberg, x));
    CHECK(e.norm() < 1e-15);
    Vec lhs = group_mul(GroupOp::Heisenberg, group_mul(GroupOp::Heisenberg, x, y), pts[2]);
    Vec rhs = group_mul(GroupOp::Heisenberg, x, group_mul(GroupOp::Heisenberg, y, pts[2]));
    CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("torus homothety") {
    auto pairs = random_close_pairs(1000, 3);
    auto r = torus_homothety_check(pairs);
    CHECK(r.pairs == 1000);
    CHECK(r.max_ratio_error < 1e-12);

    Vec x(2);
    x << 0.3, 0.6;
    auto zero = torus_homothety_check({{x, x}});
    CHECK(zero.skipped == 1);
    CHECK(zero.pairs == 0);

    Vec far(2);
    far << 0.8, 0.1;
    CHECK_THROWS_AS(torus_homothety_check({{x, far}}), Error);

    // close pair across the seam: lift by hand
    Vec a(2), b(2);
    a << 0.99, 0.5;
    b << 0.01, 0.5;
    double d = baby_norm(Vec(Eigen::Vector2d(0.02, 0.0)));
    CHECK(torus_distance(a, b) == doctest::Approx(d).epsilon(1e-12));
    CHECK(torus_distance(torus_map(a), torus_map(b)) == doctest::Approx(3 * d).epsilon(1e-12));
}

TEST_CASE("conformal dimension is informational") {
    CHECK(conformal_dimension(decompose(parse_matrix("2,0,0;0,2,0;0,0,4"))) == doctest::Approx(4.0));
    CHECK(conformal_dimension(decompose(parse_matrix("3,0;0,3"))) == doctest::Approx(2.0));
}
