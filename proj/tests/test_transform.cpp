#include <doctest.h>

#include <random>

#include "lamina/scenarios.hpp"
#include "lamina/transform.hpp"
#include "oracles.hpp"

using namespace lamina;

namespace {

TransformConfig config_for(const Scenario& sc, Exec exec = Exec::parallel) {
    TransformConfig cfg;
    cfg.eta = sc.eta;
    cfg.exec = exec;
    return cfg;
}

} // namespace

TEST_CASE("expanded transform: one application on the skew product") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 256, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    Section s1 = transform_expanded(sc.perturbed, lam, fb, zero_section(lam), sc.pullback,
                                    config_for(sc));
    for (int f = 0; f < lam.node_count(); ++f) {
        double want = -0.01 * std::sin(lam.axes[0].coord(f));
        CHECK(std::fabs(s1.node_value(0, f)[0] - want) < 1e-10);
    }
}

TEST_CASE("expanded fixed point matches the closed-form series") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 1024, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, config_for(sc));
    CHECK(rep.converged);
    double worst = 0;
    for (int f = 0; f < lam.node_count(); ++f)
        worst = std::max(worst, std::fabs(s.node_value(0, f)[0] -
                                          oracles::doubling_skew_series(lam.axes[0].coord(f))));
    CHECK(worst <= 1e-9);
    // spot value at x = 1/4 of the unit circle parameter
    Vec spot = s.eval(0, Vec{{std::numbers::pi / 2}});
    CHECK(std::fabs(spot[0] - (-0.01)) < 1e-10);
    // contraction ratio settles near the normal rate reciprocal
    for (size_t k = 2; k < rep.iterations.size(); ++k) {
        if (rep.iterations[k].sup_distance <= 1e-13) break;
        CHECK(rep.iterations[k].ratio >= 0.08);
        CHECK(rep.iterations[k].ratio <= 0.12);
    }
    CHECK(rep.final_residual <= 10 * config_for(sc).newton_tol);
}

TEST_CASE("unperturbed systems are fixed in one iteration") {
    for (const char* name : {"doubling_skew", "circle", "solenoid"}) {
        auto sc = build_scenario(name, unperturbed_params(name), 128, 3);
        const auto& lam = sc.lamination();
        auto fb = build_normal_frames(lam, sc.frame_hint);
        Variant v = sc.variant == Variant::hyperbolic ? Variant::expanded : sc.variant;
        auto [s, rep] = iterate_to_fixed_point(sc.base, lam, fb, zero_section(lam), v,
                                               sc.pullback, config_for(sc));
        CHECK(rep.converged);
        CHECK(rep.iterations.size() == 1);
        CHECK(rep.iterations[0].sup_distance <= 1e-11);
        CHECK(s.sup_norm() <= 1e-11);
    }
}

TEST_CASE("contracted transform: one application on the solenoid") {
    auto sc = build_scenario("solenoid", {}, 256, 2);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    Section s1 = transform_contracted(sc.perturbed, lam, fb, zero_section(lam), sc.pullback,
                                      config_for(sc));
    for (int c : lam.primary_codes())
        for (int f = 0; f < lam.node_count(); f += 5) {
            auto angles =
                oracles::solenoid_preimage_angles(lam.codes[c].symbols, lam.axes[0].coord(f));
            CHECK(std::fabs(s1.node_value(c, f)[0] - 0.5 * std::sin(angles[0])) < 1e-10);
        }
}

TEST_CASE("contracted fixed point is the truncated series on the code tree") {
    auto sc = build_scenario("solenoid", {}, 512, 5);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, config_for(sc));
    CHECK(rep.converged);
    // every tree depth carries its own partial series
    double worst = 0;
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < lam.node_count(); f += 3) {
            double want = oracles::solenoid_series(lam.codes[c].symbols, lam.axes[0].coord(f));
            worst = std::max(worst, std::fabs(s.node_value(c, f)[0] - want));
        }
    CHECK(worst <= 1e-9);
    // the depth-2 spot value: theta=0, history (pi, pi/2) -> 1/4 exactly
    int spot = lam.code_index(TransversalCode{{1, 0}});
    CHECK(std::fabs(s.node_value(spot, 0)[0] - 0.25) < 1e-10);
    // ratios stay at the tree contraction rate until truncation
    CHECK(rep.iterations.size() <= 8);
    for (size_t k = 1; k + 1 < rep.iterations.size(); ++k)
        CHECK(rep.iterations[k].ratio <= 0.55);
    CHECK(rep.final_residual <= 1e-11);
}

TEST_CASE("re-applying the transform after convergence moves nothing") {
    auto sc = build_scenario("solenoid", {}, 128, 4);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, cfg);
    Section again = transform_contracted(sc.perturbed, lam, fb, s, sc.pullback, cfg);
    CHECK(again.sup_distance(s) <= 10 * cfg.newton_tol);
}

TEST_CASE("C0 contraction on random section pairs") {
    auto sc = build_scenario("doubling_skew", {}, 128, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> amp(-0.2, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
        Section a = zero_section(lam), b = zero_section(lam);
        for (int f = 0; f < lam.node_count(); ++f) {
            a.set_node_value(0, f, Vec{{amp(rng)}});
            b.set_node_value(0, f, Vec{{amp(rng)}});
        }
        Section ta = transform_expanded(sc.perturbed, lam, fb, a, sc.pullback, cfg);
        Section tb = transform_expanded(sc.perturbed, lam, fb, b, sc.pullback, cfg);
        double num = ta.sup_distance(tb);
        double den = a.sup_distance(b);
        CHECK(num <= 0.11 * den); // normal rate 10
    }
}

TEST_CASE("localization: converged section vanishes outside V") {
    auto sc = build_scenario("quadratic_plane", {}, 48, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, config_for(sc));
    CHECK(rep.converged);
    bool checked_outside = false;
    for (int f = 0; f < lam.node_count(); ++f) {
        Vec u = lam.node_params(f);
        if (lam.bump(u) == 0.0) {
            checked_outside = true;
            CHECK(s.node_value(0, f).norm() == 0.0);
        }
    }
    CHECK(checked_outside);
    CHECK(s.sup_norm() > 1e-4); // and it is not the zero section inside
}

TEST_CASE("induced pullback: unperturbed dynamics reproduces the catalog rule") {
    auto sc = build_scenario("doubling_skew", unperturbed_params("doubling_skew"), 128, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    Section s = zero_section(lam);
    NodeField base_field = immersion_field(lam);
    for (int f = 0; f < lam.node_count(); f += 7) {
        auto pb = induced_pullback(sc.base, lam, fb, base_field, s, sc.pullback, cfg, 0, f);
        double want = wrap_angle(2 * lam.axes[0].coord(f));
        CHECK(angle_distance(wrap_angle(pb.u[0]), want) < 1e-10);
        CHECK(pb.residual < 1e-10);
    }
}

TEST_CASE("induced pullback tracks a perturbed base map") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 512, 0);
    // perturb the base direction as well: f'(t,y) = (2t + 0.01 sin t, 10y + 0.1 sin t)
    sc.perturbed.raw = [](const Vec& x) {
        return Vec{{2 * x[0] + 0.01 * std::sin(x[0]), 10 * x[1] + 0.1 * std::sin(x[0])}};
    };
    sc.perturbed.jac = [](const Vec& x) {
        Mat J(2, 2);
        J << 2 + 0.01 * std::cos(x[0]), 0, 0.1 * std::cos(x[0]), 10;
        return J;
    };
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, cfg);
    CHECK(rep.converged);
    NodeField base_field = immersion_field(lam);
    for (int f = 0; f < lam.node_count(); f += 17) {
        double t = lam.axes[0].coord(f);
        auto pb = induced_pullback(sc.perturbed, lam, fb, base_field, s, sc.pullback, cfg, 0, f);
        CHECK(angle_distance(wrap_angle(pb.u[0]), wrap_angle(2 * t + 0.01 * std::sin(t))) < 1e-8);
    }
}

TEST_CASE("induced pullback shifts solenoid codes") {
    auto sc = build_scenario("solenoid", {}, 128, 3);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, cfg);
    NodeField base_field = immersion_field(lam);
    int c = lam.code_index(TransversalCode{{1, 0}});
    int f = 32;
    auto pb = induced_pullback(sc.perturbed, lam, fb, base_field, s, sc.pullback, cfg, c, f);
    auto want = sc.pullback.forward(c, lam.node_params(f));
    CHECK(pb.code == want.first);
}

TEST_CASE("tube violations raise a transversality error naming the node") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 64, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    cfg.eta = 1e-4; // the one-step image leaves a tube this small
    cfg.newton_tol = 1e-6;
    try {
        transform_expanded(sc.perturbed, lam, fb, zero_section(lam), sc.pullback, cfg);
        FAIL("expected a transversality error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::transversality);
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("non-contraction is detected") {
    // normal rate below 1 makes the expanded transform expand differences; the
    // grid must be fine enough that the doubling modes are resolved for > 5
    // iterations before they alias past the Nyquist frequency
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}, {"normal_rate", 0.5}}, 512, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    cfg.eta = 10.0;
    cfg.fixpoint_max = 60;
    CHECK_THROWS_AS(iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, cfg),
                    Error);
}

TEST_CASE("serial and parallel execution produce identical sections") {
    auto sc = build_scenario("solenoid", {}, 128, 4);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    auto [sp, rp] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback,
                                           config_for(sc, Exec::parallel));
    auto [ss, rs] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback,
                                           config_for(sc, Exec::serial));
    CHECK(sp.sup_distance(ss) == 0.0);
    REQUIRE(rp.iterations.size() == rs.iterations.size());
    for (size_t k = 0; k < rp.iterations.size(); ++k)
        CHECK(rp.iterations[k].sup_distance == rs.iterations[k].sup_distance);
}
