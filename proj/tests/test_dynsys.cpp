#include <doctest.h>

#include <limits>
#include <random>

#include "lamina/map_system.hpp"
#include "lamina/scenarios.hpp"

using namespace lamina;

namespace {

MapSystem complex_square() {
    MapSystem m;
    m.space = StateSpace::lines(2);
    m.space.complex_pairs = {{0, 1}};
    m.raw = [](const Vec& x) {
        return Vec{{x[0] * x[0] - x[1] * x[1], 2 * x[0] * x[1]}};
    };
    return m;
}

} // namespace

TEST_CASE("eval_map on the cylinder map") {
    auto sc = build_scenario("solenoid", {}, 64, 1);
    Vec y = eval_map(sc.perturbed, Vec{{0.0, std::numbers::pi / 2}});
    CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("eval_map on the torus system") {
    auto sc = build_scenario("torus", {{"alpha", 1.0}}, 32, 1);
    Vec y = eval_map(sc.base, Vec{{0.0, 0.0, 1.0, 1.0}});
    CHECK(y[0] == doctest::Approx(0.0));
    CHECK(y[1] == doctest::Approx(1.0));
    CHECK(y[2] == doctest::Approx(0.0));
    CHECK(y[3] == doctest::Approx(10.0));
}

TEST_CASE("eval_map identity and errors") {
    MapSystem id;
    id.space = StateSpace::lines(3);
    id.raw = [](const Vec& x) { return x; };
    Vec x{{0.3, -2.0, 7.5}};
    CHECK((eval_map(id, x) - x).norm() == 0.0);

    CHECK_THROWS_AS(eval_map(id, Vec{{1.0, 2.0}}), Error);

    MapSystem bad = id;
    bad.raw = [](const Vec& x) {
        Vec y = x;
        y[0] = std::numeric_limits<double>::quiet_NaN();
        return y;
    };
    CHECK_THROWS_AS(eval_map(bad, x), Error);
}

TEST_CASE("jacobian of the cylinder map matches the analytic matrix") {
    auto sc = build_scenario("solenoid", {}, 64, 1);
    for (double th : {0.0, 0.7, 2.9}) {
        Mat J = jacobian(sc.perturbed, Vec{{0.1, th}});
        CHECK(J(0, 0) == doctest::Approx(0.5));
        CHECK(J(0, 1) == doctest::Approx(0.5 * std::cos(th)));
        CHECK(J(1, 0) == doctest::Approx(0.0));
        CHECK(J(1, 1) == doctest::Approx(2.0));
    }
}

TEST_CASE("finite-difference jacobian of an affine map is exact to 1e-7") {
    MapSystem m;
    m.space = StateSpace::lines(3);
    Mat A(3, 3);
    A << 1.5, -0.3, 0.2, 0.0, 2.0, 1.1, -0.7, 0.4, 0.9;
    m.raw = [A](const Vec& x) { return Vec(A * x + Vec{{0.1, -0.2, 0.3}}); };
    Mat J = jacobian(m, Vec{{0.4, -1.2, 3.3}});
    CHECK((J - A).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("jacobian of the complex square at z=1 is 2I") {
    Mat J = jacobian(complex_square(), Vec{{1.0, 0.0}});
    CHECK(J(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(J(0, 1) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(J(1, 0) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(J(1, 1) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("check_holomorphy separates holomorphic from conjugation") {
    MapSystem sq = complex_square(); // z^2 + c with c = 0
    CHECK(check_holomorphy(sq, Vec{{1.0, 1.0}}) <= 1e-6);

    MapSystem conj;
    conj.space = sq.space;
    conj.raw = [](const Vec& x) { return Vec{{x[0], -x[1]}}; };
    CHECK(check_holomorphy(conj, Vec{{1.0, 0.0}}) == doctest::Approx(2.0).epsilon(1e-7));

    auto henon = build_scenario("henon", {}, 16, 1);
    CHECK(check_holomorphy(henon.perturbed, Vec{{0.0, 0.0, 0.0, 0.0}}) <= 1e-6);

    MapSystem no_pairs;
    no_pairs.space = StateSpace::lines(2);
    no_pairs.raw = [](const Vec& x) { return x; };
    CHECK_THROWS_AS(check_holomorphy(no_pairs, Vec{{0.0, 0.0}}), Error);
}

TEST_CASE("declared-holomorphic scenario systems pass the residual check") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> box(-0.7, 0.7);
    for (const char* name : {"quadratic_plane", "henon"}) {
        auto sc = build_scenario(name, {}, 16, 1);
        for (int i = 0; i < 100; ++i) {
            Vec x{{box(rng), box(rng), 0.1 * box(rng), 0.1 * box(rng)}};
            CHECK(check_holomorphy(sc.perturbed, x) <= 1e-6);
        }
    }
}

TEST_CASE("angle-wrap invariance of scenario maps") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    auto sc = build_scenario("doubling_skew", {}, 64, 0);
    for (int i = 0; i < 25; ++i) {
        Vec x{{ang(rng), 0.05 * ang(rng)}};
        Vec shifted = x;
        shifted[0] += kTwoPi;
        Vec a = eval_map(sc.perturbed, x);
        Vec b = eval_map(sc.perturbed, sc.perturbed.space.wrap(shifted));
        CHECK(angle_distance(a[0], b[0]) < 1e-12);
        CHECK(std::fabs(a[1] - b[1]) < 1e-12);
    }
}

TEST_CASE("deformation family reproduces the unperturbed system at t=0") {
    auto sc = build_scenario("henon", {}, 16, 1);
    REQUIRE(sc.family.has_value());
    auto f0 = sc.family->at(0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> box(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
        Vec x{{box(rng), box(rng), box(rng), box(rng)}};
        CHECK((f0.raw(x) - sc.base.raw(x)).norm() < 1e-14);
    }
}
