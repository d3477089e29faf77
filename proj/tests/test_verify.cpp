#include <doctest.h>

#include "lamina/verify.hpp"
#include "oracles.hpp"

using namespace lamina;

namespace {

TransformConfig config_for(const Scenario& sc) {
    TransformConfig cfg;
    cfg.eta = sc.eta;
    return cfg;
}

// self-intersecting test input: a figure-eight immersed circle
std::shared_ptr<DiscreteLamination> figure_eight(int nodes) {
    auto lam = std::make_shared<DiscreteLamination>();
    lam->space = StateSpace::lines(2);
    lam->axes = {GridAxis{true, 0, kTwoPi, nodes}};
    lam->codes = {TransversalCode{}};
    lam->metric_scale = Vec::Ones(1);
    Eigen::MatrixXd v(2, nodes);
    for (int j = 0; j < nodes; ++j) {
        double t = lam->axes[0].coord(j);
        v.col(j) = Vec{{std::sin(2 * t), std::sin(t)}};
    }
    lam->values = {std::move(v)};
    lam->default_monodromy();
    lam->validate();
    return lam;
}

} // namespace

TEST_CASE("injectivity margin of the embedded circle is the chord length") {
    auto sc = build_scenario("circle", {}, 1024, 0);
    auto report = injectivity_margin(sc.lamination(), immersion_field(sc.lamination()), 0.1,
                                     2000, 7);
    CHECK(report.margin == doctest::Approx(2 * std::sin(0.05)).epsilon(0.01));
    CHECK(report.injective_at_resolution());
}

TEST_CASE("injectivity margin is monotone in eps0") {
    auto sc = build_scenario("circle", {}, 512, 0);
    auto imm = immersion_field(sc.lamination());
    double prev = 0;
    for (double eps0 : {0.05, 0.1, 0.2, 0.4}) {
        auto r = injectivity_margin(sc.lamination(), imm, eps0, 1500, 99);
        CHECK(r.margin >= prev - 1e-12);
        prev = r.margin;
    }
}

TEST_CASE("solenoid margin stays positive at sampling resolution but is capped") {
    auto sc = build_scenario("solenoid", {}, 256, 2);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, config_for(sc));
    NodeField immersed = section_to_immersion(lam, fb, s);
    auto report = injectivity_margin(lam, immersed, 0.3, 4000, 5, scenario_code_metric(sc));
    CHECK(report.margin > 0.0);
    CHECK(report.margin <= 0.2501); // the matched-parameter pair at theta = 0
}

TEST_CASE("figure-eight input is flagged non-injective") {
    auto lam = figure_eight(512);
    auto report = injectivity_margin(*lam, immersion_field(*lam), 0.1, 2000, 11);
    CHECK(report.margin <= 1e-9);
    CHECK(!report.injective_at_resolution());
}

TEST_CASE("forward shadowing of an exact orbit on the invariant graph") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 512, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, cfg);

    // ambient orbit started on the computed graph, pseudo-orbit = base rule
    std::vector<std::pair<int, Vec>> pseudo;
    std::vector<Vec> ambient;
    double theta = lam.axes[0].coord(37);
    Vec y{{theta, s.eval(0, Vec{{theta}})[0]}};
    int c = 0;
    Vec u{{theta}};
    for (int k = 0; k < 12; ++k) {
        pseudo.push_back({c, u});
        ambient.push_back(y);
        y = sc.perturbed.raw(y);
        auto [nc, nu] = sc.pullback.forward(c, u);
        c = nc;
        u = nu;
    }
    auto res = shadow_check_forward(sc.perturbed, lam, fb, s, pseudo, ambient, 0.15,
                                    sc.pullback, cfg);
    CHECK(res.ok);
    CHECK(res.residual <= 1e-9);
    CHECK(res.leaf_offset <= 1e-7);
}

TEST_CASE("backward shadowing of an exact preorbit on the solenoid") {
    // the tree consumes one code symbol per inverse step, so a 10-point chain
    // needs truncation depth >= 10
    auto sc = build_scenario("solenoid", {}, 48, 11);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, cfg);

    // walk backwards along the codes from a full-depth node; the reversed
    // chain is an exact orbit of the truncated object
    int c = lam.code_index(TransversalCode{{1, 0, 1, 0, 1, 0, 1, 1, 0, 0, 1}});
    Vec u{{lam.axes[0].coord(11)}};
    std::vector<std::pair<int, Vec>> chain{{c, u}};
    for (int k = 0; k < 9; ++k) {
        auto src = sc.pullback.inverse(chain.back().first, chain.back().second);
        REQUIRE(src.has_value());
        chain.push_back({src->first, src->second});
    }
    std::reverse(chain.begin(), chain.end());
    NodeField immersed = section_to_immersion(lam, fb, s);
    std::vector<Vec> ambient;
    for (auto& [cc, uu] : chain) ambient.push_back(immersed.eval(cc, uu));
    auto res = shadow_check_backward(sc.perturbed, lam, fb, s, chain, ambient, 1.2,
                                     sc.pullback, cfg);
    CHECK(res.ok);
    CHECK(res.residual <= 1e-9);
}

TEST_CASE("hypothesis violations are reported") {
    auto sc = build_scenario("doubling_skew", {{"b", 0.1}}, 128, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    Section s = zero_section(lam);
    std::vector<std::pair<int, Vec>> pseudo(12, {0, Vec{{0.0}}});
    std::vector<Vec> ambient(12, Vec{{0.0, 5.0}}); // far from the immersion
    CHECK_THROWS_AS(shadow_check_forward(sc.perturbed, lam, fb, s, pseudo, ambient, 0.05,
                                         sc.pullback, cfg),
                    Error);
}

TEST_CASE("expansiveness probe collapses on the solenoid") {
    auto sc = build_scenario("solenoid", {}, 128, 5);
    auto probe = plaque_expansiveness_probe(sc.lamination(), sc.pullback,
                                            scenario_code_metric(sc), 0.05, 400, 12, 2024,
                                            scenario_backward_walker(sc), 2);
    CHECK(probe.walked_backward);
    CHECK(probe.surviving_pairs > 0);
    CHECK(probe.collapsed);
    CHECK(probe.worst_root_separation < std::pow(2.0, -5));
}

TEST_CASE("expansiveness probe is inconclusive for the identity") {
    auto sc = build_scenario("doubling_skew", {}, 128, 0);
    PullbackRule identity;
    identity.forward = [](int c, const Vec& u) { return std::make_pair(c, u); };
    auto probe = plaque_expansiveness_probe(sc.lamination(), identity, nullptr, 0.05, 400, 12,
                                            2024);
    CHECK(probe.surviving_pairs > 0);
    CHECK(probe.inconclusive);
    CHECK(probe.worst_root_separation > 0.5 * 0.05);
}

TEST_CASE("sufficient-condition search on the skew product") {
    auto sc = build_scenario("doubling_skew", {}, 128, 0);
    auto probe = plaque_expansiveness_probe(sc.lamination(), sc.pullback, nullptr, 0.05, 50, 10,
                                            77);
    // leaf plaques double per step: delta ~ eps / 2^horizon survives
    CHECK(probe.delta_for_eps > 0);
    CHECK(probe.delta_for_eps <= 0.05 / std::pow(2.0, 9));
}

TEST_CASE("bounded orbits of the quadratic plane map lie on the computed section") {
    auto sc = build_scenario("quadratic_plane", {}, 64, 0);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg = config_for(sc);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::expanded, sc.pullback, cfg);
    REQUIRE(rep.converged);

    std::vector<Vec> samples;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            double x = -1.8 + 2.6 * i / 99.0;
            double y = -1.3 + 2.6 * j / 99.0;
            samples.push_back(Vec{{x, y, 0.0, 0.0}});
        }
    auto step = [&](const Vec& p) { return sc.perturbed.raw(p); };
    auto bounds = [](const Vec& p) { return p.norm() <= 4.0; };
    auto seed = [](const Vec& p) { return std::make_pair(0, Vec{{p[0], p[1]}}); };
    auto rep2 = bounded_orbit_containment(step, bounds, 50, samples, lam, fb, s, seed, 1e-3,
                                          1e-2, cfg);
    CHECK(rep2.bounded > 500);
    CHECK(rep2.fraction() >= 0.99);
}
