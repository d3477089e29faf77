#include <doctest.h>

#include <random>

#include "lamina/inverse_limit.hpp"
#include "lamina/scenarios.hpp"
#include "oracles.hpp"

using namespace lamina;

TEST_CASE("preorbit space sizes") {
    auto sol = build_scenario("solenoid", {}, 64, 3);
    CHECK(sol.lamination().primary_codes().size() == 8);

    auto henon = build_scenario("henon", {{"c_re", -0.1}}, 64, 4);
    CHECK(henon.lamination().primary_codes().size() == 16); // quadratic branches

    auto depth0 = build_scenario("solenoid", {}, 64, 0);
    CHECK(depth0.lamination().code_count() == 1); // the base itself
}

TEST_CASE("branch solver consistency") {
    auto sc = build_scenario("henon", {}, 48, 2);
    const auto& s = *sc.scheme;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rho(s.axes[0].lo, s.axes[0].hi());
    std::uniform_real_distribution<double> phi(0.0, kTwoPi);
    for (int i = 0; i < 200; ++i) {
        Vec u{{rho(rng), phi(rng)}};
        auto pre = s.branches(u);
        REQUIRE(pre.size() == 2);
        for (const auto& y : pre) {
            CHECK(chart_distance(s.axes, s.base_map(y), u) < 1e-10);
            // preimages stay inside the chart
            CHECK(y[0] > s.axes[0].lo);
            CHECK(y[0] < s.axes[0].hi());
        }
    }
}

TEST_CASE("transversal metric of the truncated preorbits") {
    auto sc = build_scenario("solenoid", {}, 64, 3);
    const auto& s = *sc.scheme;
    // branch words all-0 vs all-1 at theta = 0
    TransversalCode a{{0, 0, 0}}, z{{1, 1, 1}};
    Vec u{{0.0}};
    auto pa = preorbit_chain(s, a, u);
    auto pz = preorbit_chain(s, z, u);
    double expect = 0;
    for (int n = 1; n <= 3; ++n)
        expect += std::min(angle_distance(pa[n][0], pz[n][0]), 1.0) / std::pow(2.0, n);
    CHECK(preorbit_distance(s, a, u, z, u) == doctest::Approx(expect));
    // metric axioms on random code pairs
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    for (int i = 0; i < 200; ++i) {
        TransversalCode c1, c2, c3;
        for (int k = 0; k < 3; ++k) {
            c1.symbols.push_back(bit(rng));
            c2.symbols.push_back(bit(rng));
            c3.symbols.push_back(bit(rng));
        }
        Vec t{{ang(rng)}};
        double d12 = preorbit_distance(s, c1, t, c2, t);
        double d13 = preorbit_distance(s, c1, t, c3, t);
        double d32 = preorbit_distance(s, c3, t, c2, t);
        CHECK(d12 == doctest::Approx(preorbit_distance(s, c2, t, c1, t)));
        CHECK(d12 <= d13 + d32 + 1e-12);
        if (c1 == c2) CHECK(d12 == 0.0);
    }
}

TEST_CASE("shift round trip is the identity on full-depth codes") {
    auto sc = build_scenario("solenoid", {}, 64, 5);
    const auto& s = *sc.scheme;
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        TransversalCode c;
        for (int k = 0; k < 5; ++k) c.symbols.push_back(bit(rng));
        Vec u{{ang(rng)}};
        int tail = bit(rng);
        auto back = shift_inverse(s, c, u, tail);
        auto fwd = shift_forward(s, back.code, back.u);
        CHECK(fwd.code.symbols == c.symbols);
        CHECK(angle_distance(fwd.u[0], u[0]) < 1e-12);
    }
}

TEST_CASE("forward shift applies angle doubling to the history") {
    auto sc = build_scenario("solenoid", {}, 64, 2);
    const auto& s = *sc.scheme;
    // history (pi, pi/2) at theta = 0 is the branch word (1, 0)
    TransversalCode c{{1, 0}};
    auto angles = oracles::solenoid_preimage_angles(c.symbols, 0.0);
    CHECK(angles[0] == doctest::Approx(std::numbers::pi));
    CHECK(angles[1] == doctest::Approx(std::numbers::pi / 2));

    auto fwd = shift_forward(s, c, Vec{{0.0}});
    CHECK(fwd.u[0] == doctest::Approx(0.0)); // doubling fixes 0
    // new history is (0's preimage = 0-branch, old first entry pi)
    auto new_angles = oracles::solenoid_preimage_angles(fwd.code.symbols, fwd.u[0]);
    CHECK(new_angles[0] == doctest::Approx(0.0));
    CHECK(new_angles[1] == doctest::Approx(std::numbers::pi));
}

TEST_CASE("tree shifts grow and shrink the word") {
    auto sc = build_scenario("solenoid", {}, 64, 4);
    const auto& s = *sc.scheme;
    TransversalCode c{{1, 0}};
    auto up = tree_forward(s, c, Vec{{1.0}});
    CHECK(up.code.depth() == 3);
    auto down = tree_inverse(s, c, Vec{{1.0}});
    REQUIRE(down.has_value());
    CHECK(down->code.depth() == 1);
    CHECK(down->code.symbols == std::vector<int>{0});
    TransversalCode root{};
    CHECK(!tree_inverse(s, root, Vec{{1.0}}).has_value());
    CHECK_THROWS_AS(shift_inverse(s, root, Vec{{1.0}}, 0), Error);
}

TEST_CASE("solenoid monodromy is the binary odometer") {
    auto sc = build_scenario("solenoid", {}, 64, 3);
    const auto& lam = sc.lamination();
    REQUIRE(lam.monodromy[0].has_value());
    const auto& mono = *lam.monodromy[0];
    // going once around the base circle shifts every preimage angle by
    // 2pi/2^n, which increments the branch word as a binary counter
    for (int c = 0; c < lam.code_count(); ++c) {
        const auto& w = lam.codes[c].symbols;
        std::vector<int> expect = w;
        for (size_t k = 0; k < expect.size(); ++k) {
            if (expect[k] == 0) {
                expect[k] = 1;
                break;
            }
            expect[k] = 0;
        }
        CHECK(lam.codes[mono.succ[c]].symbols == expect);
    }
    // ambient winding: the angle coordinate gains a full turn
    CHECK(mono.ambient_offset[0] == 0.0);
    CHECK(mono.ambient_offset[1] == doctest::Approx(kTwoPi));
}

TEST_CASE("henon annulus monodromy swaps square-root branches") {
    auto sc = build_scenario("henon", {}, 48, 2);
    const auto& lam = sc.lamination();
    REQUIRE(lam.monodromy[1].has_value());
    const auto& mono = *lam.monodromy[1];
    // first symbol flips when the base point winds once around the annulus
    for (int c = 0; c < lam.code_count(); ++c) {
        const auto& w = lam.codes[c].symbols;
        if (w.empty()) {
            CHECK(mono.succ[c] == c);
            continue;
        }
        CHECK(lam.codes[mono.succ[c]].symbols[0] == 1 - w[0]);
    }
    // no ambient angle coordinates on C^2
    CHECK(mono.ambient_offset.cwiseAbs().maxCoeff() == 0.0);
}
