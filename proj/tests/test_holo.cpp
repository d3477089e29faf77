#include <doctest.h>

#include "lamina/holo.hpp"
#include "lamina/tangent.hpp"

using namespace lamina;

namespace {

// flat complex plane leaf in C^2: base immersion (z, 0), vertical frames
struct FlatC2 {
    std::shared_ptr<DiscreteLamination> lam;
    FrameBundle fb;
};

FlatC2 flat_c2(int nodes) {
    auto lam = std::make_shared<DiscreteLamination>();
    lam->space = StateSpace::lines(4);
    lam->space.complex_pairs = {{0, 1}, {2, 3}};
    lam->axes = {GridAxis{false, -1.0, 2.0, nodes}, GridAxis{false, -1.0, 2.0, nodes}};
    lam->codes = {TransversalCode{}};
    lam->metric_scale = Vec::Ones(2);
    Eigen::MatrixXd v(4, lam->node_count());
    for (int f = 0; f < lam->node_count(); ++f) {
        Vec u = lam->node_params(f);
        v.col(f) = Vec{{u[0], u[1], 0.0, 0.0}};
    }
    lam->values = {std::move(v)};
    lam->default_monodromy();
    lam->validate();
    FrameHint vertical = [](const TransversalCode&, const Vec&) {
        Mat F = Mat::Zero(4, 2);
        F(2, 0) = 1;
        F(3, 1) = 1;
        return F;
    };
    FlatC2 out{lam, build_normal_frames(*lam, vertical)};
    return out;
}

Section graph_section(const FlatC2& fc, const std::function<std::complex<double>(
                                             std::complex<double>)>& w) {
    Section s = zero_section(*fc.lam);
    for (int f = 0; f < fc.lam->node_count(); ++f) {
        Vec u = fc.lam->node_params(f);
        auto val = w({u[0], u[1]});
        s.set_node_value(0, f, Vec{{val.real(), val.imag()}});
    }
    return s;
}

} // namespace

TEST_CASE("J-invariance residual separates holomorphic and conjugate graphs") {
    auto fc = flat_c2(48);
    const std::vector<std::pair<int, int>> leaf_pairs{{0, 1}};

    Section lin = graph_section(fc, [](std::complex<double> z) {
        return std::complex<double>(0.4, -0.3) * z;
    });
    PlaneField pf = tangent_planes_fd(*fc.lam, fc.fb, lin);
    CHECK(j_invariance_residual(*fc.lam, fc.fb, pf).sup < 1e-12);

    Section conj = graph_section(fc, [](std::complex<double> z) { return std::conj(z); });
    PlaneField pfc = tangent_planes_fd(*fc.lam, fc.fb, conj);
    CHECK(j_invariance_residual(*fc.lam, fc.fb, pfc).sup == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("leafwise Cauchy-Riemann residual") {
    auto fc = flat_c2(48);
    const std::vector<std::pair<int, int>> leaf_pairs{{0, 1}};

    Section sq = graph_section(fc, [](std::complex<double> z) { return z * z; });
    auto rep = holomorphy_residual_section(*fc.lam, fc.fb, sq, leaf_pairs);
    CHECK(rep.sup < 1e-10); // cubic interpolation reproduces quadratics exactly

    Section cj = graph_section(fc, [](std::complex<double> z) { return std::conj(z); });
    auto repc = holomorphy_residual_section(*fc.lam, fc.fb, cj, leaf_pairs);
    CHECK(repc.sup == doctest::Approx(1.0).epsilon(1e-3));

    DiscreteLamination no_pairs = *fc.lam;
    no_pairs.space.complex_pairs.clear();
    CHECK_THROWS_AS(holomorphy_residual_section(no_pairs, fc.fb, sq, leaf_pairs), Error);
}

TEST_CASE("converged preorbit-annulus object is J-invariant and holomorphic") {
    auto sc = build_scenario("henon", {}, 48, 3);
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);
    TransformConfig cfg;
    cfg.eta = sc.eta;
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam),
                                           Variant::contracted, sc.pullback, cfg);
    REQUIRE(rep.converged);
    PlaneIterationConfig pcfg;
    auto [pf, prep] = iterate_plane_field(sc.perturbed, lam, fb, s, Variant::contracted,
                                          sc.pullback, pcfg);
    REQUIRE(prep.converged);

    double h = lam.axes[1].spacing();
    double bound = std::max(1e-6, 10 * h * h);
    auto jrep = j_invariance_residual(lam, fb, pf);
    CHECK(jrep.sup <= bound);
    auto crep = holomorphy_residual_section(lam, fb, s, sc.leaf_complex_axes);
    CHECK(crep.sup <= bound);
}

TEST_CASE("constant deformation family stays at the center section") {
    auto sc = build_scenario("henon", {}, 32, 2);
    DeformationFamily constant;
    constant.disk_radius = 0.02;
    MapSystem f0 = sc.base;
    constant.at = [f0](std::complex<double>) { return f0; };
    TransformConfig cfg;
    cfg.eta = sc.eta;
    std::vector<Section> sections;
    auto rep = deform_family(sc, constant, default_t_grid(0.02), Variant::contracted, cfg,
                             &sections);
    for (const auto& p : rep.points) CHECK(p.converged);
    for (const auto& s : sections) CHECK(s.sup_distance(sections[0]) == 0.0);
    CHECK(rep.parameter_cr_sup < 1e-12);
}

TEST_CASE("holomorphic family has a small parameter CR defect") {
    auto sc = build_scenario("henon", {}, 32, 3);
    TransformConfig cfg;
    cfg.eta = sc.eta;
    auto rep = deform_family(sc, *sc.family, default_t_grid(sc.family->disk_radius),
                             Variant::contracted, cfg);
    for (const auto& p : rep.points) CHECK(p.converged);
    double db = sc.family->disk_radius / 2;
    CHECK(rep.parameter_cr_sup <= std::max(1e-6, 10 * db * db));
    CHECK(rep.converged_radius == doctest::Approx(sc.family->disk_radius));
    CHECK(rep.warm_cold_gap <= 1e-8);
}

TEST_CASE("real-but-not-complex family is detected by the parameter CR defect") {
    auto sc = build_scenario("henon", {}, 32, 2);
    DeformationFamily real_fam;
    real_fam.disk_radius = 0.02;
    auto base_family = *sc.family;
    real_fam.at = [base_family](std::complex<double> t) {
        return base_family.at(t.real()); // depends on Re(t) only
    };
    TransformConfig cfg;
    cfg.eta = sc.eta;
    std::vector<Section> sections;
    auto rep = deform_family(sc, real_fam, default_t_grid(0.02), Variant::contracted, cfg,
                             &sections);
    // linear response magnitude per unit parameter
    double response = 0;
    for (size_t i = 0; i < rep.points.size(); ++i)
        if (std::fabs(rep.points[i].t.real()) > 1e-12)
            response = std::max(response, sections[i].sup_distance(sections[0]) /
                                              std::fabs(rep.points[i].t.real()));
    CHECK(rep.parameter_cr_sup >= 0.4 * response);
}
