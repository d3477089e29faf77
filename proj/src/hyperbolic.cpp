#include "lamina/hyperbolic.hpp"

#include "lamina/newton.hpp"

namespace lamina {

DiscreteLamination thicken(const DiscreteLamination& base, const Mat& basis, double radius,
                           int nodes_per_axis) {
    const int k = (int)basis.cols();
    DiscreteLamination out;
    out.space = base.space;
    out.axes = base.axes;
    for (int j = 0; j < k; ++j)
        out.axes.push_back(GridAxis{false, -radius, 2 * radius, nodes_per_axis});
    out.codes = base.codes;
    out.depth = base.depth;
    out.metric_scale = Vec::Ones(base.d() + k);
    out.metric_scale.head(base.d()) = base.metric_scale;
    out.scenario = base.scenario;

    // marked region: thick axes unrestricted
    out.marked = base.marked;
    if (!base.marked.everything) {
        out.marked.center = Vec::Zero(base.d() + k);
        out.marked.inner_hw =
            Vec::Constant(base.d() + k, std::numeric_limits<double>::infinity());
        out.marked.outer_hw = out.marked.inner_hw;
        out.marked.center.head(base.d()) = base.marked.center;
        out.marked.inner_hw.head(base.d()) = base.marked.inner_hw;
        out.marked.outer_hw.head(base.d()) = base.marked.outer_hw;
    }

    const int base_nodes = base.node_count();
    int thick_nodes = 1;
    for (int j = 0; j < k; ++j) thick_nodes *= nodes_per_axis;

    out.values.resize(out.code_count());
    for (int c = 0; c < out.code_count(); ++c) {
        Eigen::MatrixXd v(out.n(), base_nodes * thick_nodes);
        for (int t = 0; t < thick_nodes; ++t) {
            Vec a(k);
            int rem = t;
            for (int j = 0; j < k; ++j) {
                a[j] = out.axes[base.d() + j].coord(rem % nodes_per_axis);
                rem /= nodes_per_axis;
            }
            Vec offset = basis * a;
            for (int f = 0; f < base_nodes; ++f)
                v.col(t * base_nodes + f) = base.values[c].col(f) + offset;
        }
        out.values[c] = std::move(v);
    }

    out.monodromy.assign(out.axes.size(), std::nullopt);
    for (int ax = 0; ax < base.d(); ++ax)
        if (base.monodromy[ax]) out.monodromy[ax] = *base.monodromy[ax];
    out.validate();
    return out;
}

namespace {

// pullback rule on the thickened lamination: base rule on the leaf part,
// scalar rule per thick axis
PullbackRule thicken_pullback(const PullbackRule& base, int base_d, int k,
                              const std::function<double(double)>& fwd,
                              const std::function<double(double)>& inv) {
    PullbackRule rule;
    rule.invertible = base.invertible && (bool)inv;
    rule.forward = [base, base_d, k, fwd](int c, const Vec& u) {
        auto [bc, bu] = base.forward(c, Vec(u.head(base_d)));
        Vec out(base_d + k);
        out.head(base_d) = bu;
        for (int j = 0; j < k; ++j) out[base_d + j] = fwd(u[base_d + j]);
        return std::make_pair(bc, out);
    };
    if (base.inverse && inv)
        rule.inverse = [base, base_d, k,
                        inv](int c, const Vec& u) -> std::optional<std::pair<int, Vec>> {
            auto src = base.inverse(c, Vec(u.head(base_d)));
            if (!src) return std::nullopt;
            Vec out(base_d + k);
            out.head(base_d) = src->second;
            for (int j = 0; j < k; ++j) out[base_d + j] = inv(u[base_d + j]);
            return std::make_pair(src->first, out);
        };
    return rule;
}

ThickenedLamination build_side(const Scenario& sc, bool stable_side, double disk_radius,
                               int disk_nodes, const TransformConfig& cfg) {
    const auto& hyper = *sc.hyper;
    const Mat& basis = stable_side ? hyper.stable_basis : hyper.unstable_basis;
    const Mat& other = stable_side ? hyper.unstable_basis : hyper.stable_basis;
    const int k = (int)basis.cols();

    ThickenedLamination out;
    out.thick_axes = k;
    out.lam = std::make_shared<DiscreteLamination>(
        thicken(sc.lamination(), basis, disk_radius, disk_nodes));

    // fiber of the thickened bundle: the opposite strong direction
    Mat fiber = other;
    FrameHint hint = [fiber](const TransversalCode&, const Vec&) { return fiber; };
    out.frames = build_normal_frames(*out.lam, hint);

    out.pullback = thicken_pullback(
        sc.pullback, sc.lamination().d(), k,
        stable_side ? hyper.stable_thick_fwd : hyper.unstable_thick_fwd,
        stable_side ? std::function<double(double)>{} : hyper.unstable_thick_inv);

    Section s0 = zero_section(*out.lam);
    auto [s, rep] = iterate_to_fixed_point(sc.perturbed, *out.lam, out.frames, s0,
                                           stable_side ? Variant::expanded : Variant::contracted,
                                           out.pullback, cfg);
    out.section = std::move(s);
    out.report = std::move(rep);
    return out;
}

struct IntersectionSolver {
    const DiscreteLamination& lam;
    const FrameBundle& fb;
    const NodeField& imm_s;
    const NodeField& imm_u;
    int dims, dimu;

    IntersectionPoint solve(int code, int flat, const TransformConfig& cfg) const {
        const int n = lam.n(), d = lam.d(), nd = n - d;
        const Vec x0 = lam.values[code].col(flat);
        const Mat F = fb.frame_at(code, flat);
        const Vec u_base = lam.node_params(flat);

        Vec q = Vec::Zero(dims + dimu + nd);
        q.head(d) = u_base;
        q.segment(dims, d) = u_base;

        Vec val_s, val_u;
        Eigen::MatrixXd dval_s, dval_u;
        double margin = 0;
        auto system = [&](const Vec& qq, Vec& R, Mat& J) {
            imm_s.eval_jet(code, Vec(qq.head(dims)), val_s, dval_s);
            imm_u.eval_jet(code, Vec(qq.segment(dims, dimu)), val_u, dval_u);
            R.resize(2 * n);
            R.head(n) = ambient_difference(lam.space, val_s, val_u);
            R.tail(n) = ambient_difference(lam.space, val_s, Vec(x0 + F * qq.tail(nd)));
            J.setZero(2 * n, dims + dimu + nd);
            J.topLeftCorner(n, dims) = dval_s;
            J.block(0, dims, n, dimu) = -dval_u;
            J.bottomLeftCorner(n, dims) = dval_s;
            J.bottomRightCorner(n, nd) = -F;
            Mat stacked(n, dims + dimu);
            stacked.leftCols(dims) = dval_s;
            stacked.rightCols(dimu) = dval_u;
            Eigen::JacobiSVD<Mat> svd(stacked);
            margin = svd.singularValues().minCoeff();
        };
        NewtonOptions opt{cfg.newton_tol, 2 * cfg.newton_max, 1.0};
        auto res = newton_solve(q, system, opt);
        if (!res.converged)
            fail(ErrorKind::geometry, "transverse intersection did not converge at code " +
                                          lam.codes[code].label() + " node " +
                                          std::to_string(flat) + " (residual " +
                                          std::to_string(res.residual_norm) + ")");
        if (q.tail(nd).norm() > cfg.eta)
            fail(ErrorKind::transversality,
                 "intersection outside the tube at node " + std::to_string(flat));
        IntersectionPoint out;
        out.fiber = q.tail(nd);
        out.margin = margin;
        return out;
    }
};

} // namespace

ThickenedLamination build_stable_lamination(const Scenario& sc, double disk_radius,
                                            const TransformConfig& cfg) {
    if (!sc.hyper || sc.hyper->stable_basis.cols() == 0)
        fail(ErrorKind::input, "scenario has no stable splitting to thicken");
    return build_side(sc, true, disk_radius, 17, cfg);
}

ThickenedLamination build_unstable_lamination(const Scenario& sc, double disk_radius,
                                              const TransformConfig& cfg) {
    if (!sc.hyper || sc.hyper->unstable_basis.cols() == 0)
        fail(ErrorKind::input, "scenario has no unstable splitting to thicken");
    return build_side(sc, false, disk_radius, 17, cfg);
}

IntersectionPoint intersect_transverse(const ThickenedLamination& stable,
                                       const ThickenedLamination& unstable,
                                       const DiscreteLamination& base_lam,
                                       const FrameBundle& base_fb, int code, int flat,
                                       const TransformConfig& cfg) {
    NodeField imm_s = section_to_immersion(*stable.lam, stable.frames, stable.section);
    NodeField imm_u = section_to_immersion(*unstable.lam, unstable.frames, unstable.section);
    IntersectionSolver solver{base_lam, base_fb, imm_s, imm_u,
                              base_lam.d() + stable.thick_axes,
                              base_lam.d() + unstable.thick_axes};
    return solver.solve(code, flat, cfg);
}

HyperbolicResult persist_hyperbolic(const Scenario& sc, const TransformConfig& cfg,
                                    double disk_radius, int disk_nodes) {
    const auto& lam = sc.lamination();
    auto fb = build_normal_frames(lam, sc.frame_hint);

    HyperbolicResult out;
    out.estimate = estimate_normal_hyperbolicity(
        sc.base, lam, fb, sc.stable_hint, sc.stable_dim, sc.unstable_hint, sc.unstable_dim,
        sc.pullback, 4, 32, 6, 20240u);
    if (!out.estimate.hyperbolic || out.estimate.lambda >= 1.0)
        fail(ErrorKind::non_contraction,
             "estimator reports lambda >= 1 at r=1; hyperbolic pipeline refused");

    if (disk_radius <= 0) disk_radius = cfg.eta / 2;

    if (sc.stable_dim == 0 || sc.unstable_dim == 0) {
        // degenerate splitting: the single-variant pipeline is the object
        Variant v = sc.stable_dim == 0 ? Variant::expanded : Variant::contracted;
        auto [s, rep] = iterate_to_fixed_point(sc.perturbed, lam, fb, zero_section(lam), v,
                                               sc.pullback, cfg);
        out.section = std::move(s);
        (sc.stable_dim == 0 ? out.stable_report : out.unstable_report) = std::move(rep);
        out.min_margin = std::numeric_limits<double>::infinity();
    } else {
        ThickenedLamination ts = build_side(sc, true, disk_radius, disk_nodes, cfg);
        ThickenedLamination tu = build_side(sc, false, disk_radius, disk_nodes, cfg);
        out.stable_report = ts.report;
        out.unstable_report = tu.report;

        NodeField imm_s = section_to_immersion(*ts.lam, ts.frames, ts.section);
        NodeField imm_u = section_to_immersion(*tu.lam, tu.frames, tu.section);
        IntersectionSolver solver{lam, fb, imm_s, imm_u, lam.d() + ts.thick_axes,
                                  lam.d() + tu.thick_axes};

        out.section = zero_section(lam);
        const int nodes = lam.node_count();
        std::vector<double> margins((size_t)lam.total_nodes(),
                                    std::numeric_limits<double>::infinity());
        std::vector<std::string> failures((size_t)lam.total_nodes());
        for_each_node((std::size_t)lam.total_nodes(), cfg.exec, [&](std::size_t g) {
            const int c = (int)(g / nodes), f = (int)(g % nodes);
            try {
                IntersectionPoint p = solver.solve(c, f, cfg);
                out.section.set_node_value(c, f, p.fiber);
                margins[g] = p.margin;
            } catch (const std::exception& e) {
                failures[g] = e.what();
            }
        });
        for (size_t g = 0; g < failures.size(); ++g)
            if (!failures[g].empty())
                fail(ErrorKind::geometry,
                     "intersection failed at node " + std::to_string(g) + ": " + failures[g]);
        out.min_margin = *std::min_element(margins.begin(), margins.end());
    }

    // induced pullback table and the diagram-commutation residual
    NodeField base_field = immersion_field(lam);
    const int nodes = lam.node_count();
    const int stride = std::max(1, nodes / 512);
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; f += stride) {
            PullbackEntry e;
            e.code = c;
            e.flat = f;
            try {
                auto pb = induced_pullback(sc.perturbed, lam, fb, base_field, out.section,
                                           sc.pullback, cfg, c, f);
                e.image_code = pb.code;
                e.image_u = pb.u;
                e.residual = pb.residual;
                out.diagram_residual = std::max(out.diagram_residual, pb.residual);
            } catch (const Error&) {
                e.image_code = -1; // forward image left the chart
            }
            out.pullback_table.push_back(std::move(e));
        }
    return out;
}

} // namespace lamina
