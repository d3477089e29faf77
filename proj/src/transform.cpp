#include "lamina/transform.hpp"

#include "lamina/newton.hpp"

namespace lamina {

namespace {

struct NodeStatus {
    bool failed = false;
    int iterations = 0;
    std::string message;
};

void collect(NewtonStats* stats, const std::vector<NodeStatus>& status,
             const DiscreteLamination& lam) {
    long failures = 0;
    int max_it = 0;
    std::string first;
    for (size_t g = 0; g < status.size(); ++g) {
        max_it = std::max(max_it, status[g].iterations);
        if (status[g].failed) {
            ++failures;
            if (first.empty()) {
                int c = (int)(g / lam.node_count());
                int f = (int)(g % lam.node_count());
                first = "code " + lam.codes[c].label() + " node " + std::to_string(f) + ": " +
                        status[g].message;
            }
        }
    }
    if (stats) {
        stats->max_iterations = std::max(stats->max_iterations, max_it);
        stats->failures += failures;
    }
    if (failures)
        fail(ErrorKind::transversality,
             "graph transform failed at " + std::to_string(failures) + " node(s); first: " + first);
}

} // namespace

Section transform_expanded(const MapSystem& sys, const DiscreteLamination& lam,
                           const FrameBundle& fb, const Section& s, const PullbackRule& base,
                           const TransformConfig& cfg, NewtonStats* stats) {
    cfg.validate();
    const int n = lam.n(), d = lam.d(), nd = n - d;
    const int nodes = lam.node_count();
    Section out(&lam, nd, false);
    NodeField immersed = section_to_immersion(lam, fb, s);
    std::vector<NodeStatus> status(lam.total_nodes());

    for_each_node((std::size_t)lam.total_nodes(), cfg.exec, [&](std::size_t g) {
        const int c = (int)(g / nodes), f = (int)(g % nodes);
        NodeStatus& st = status[g];
        try {
            Vec u = lam.node_params(f);
            if (lam.bump(u) == 0.0) {
                out.set_node_value(c, f, Vec::Zero(nd));
                return;
            }
            auto [tc, tu] = base.forward(c, u);
            const Vec x0 = lam.values[c].col(f);
            const Mat F = fb.frame_at(c, f);

            // unknowns: fiber coordinate v at x, leaf parameters w at the target
            Vec q(nd + d);
            q.head(nd) = s.node_value(c, f);
            q.tail(d) = tu;

            Vec val;
            Eigen::MatrixXd dval;
            auto system = [&](const Vec& qq, Vec& R, Mat& J) {
                Vec y = sys.raw(Vec(x0 + F * qq.head(nd)));
                immersed.eval_jet(tc, qq.tail(d), val, dval);
                R = ambient_difference(sys.space, y, val);
                Mat Df = jacobian(sys, Vec(x0 + F * qq.head(nd)));
                J.resize(n, nd + d);
                J.leftCols(nd) = Df * F;
                J.rightCols(d) = -dval;
            };
            NewtonOptions opt{cfg.newton_tol, cfg.newton_max, 0.5 * cfg.eta + 1e-6};
            auto res = newton_solve(q, system, opt);
            st.iterations = res.iterations;
            if (!res.converged) {
                st.failed = true;
                st.message = "Newton residual " + std::to_string(res.residual_norm);
                return;
            }
            if (q.head(nd).norm() > cfg.eta) {
                st.failed = true;
                st.message = "intersection outside the tube (|v| = " +
                             std::to_string(q.head(nd).norm()) + " > eta)";
                return;
            }
            out.set_node_value(c, f, Vec(q.head(nd)));
        } catch (const std::exception& e) {
            st.failed = true;
            st.message = e.what();
        }
    });
    collect(stats, status, lam);
    return out;
}

Section transform_contracted(const MapSystem& sys, const DiscreteLamination& lam,
                             const FrameBundle& fb, const Section& s, const PullbackRule& base,
                             const TransformConfig& cfg, NewtonStats* stats) {
    cfg.validate();
    if (!base.inverse)
        fail(ErrorKind::input, "contracted transform needs an inverse pullback rule");
    const int n = lam.n(), d = lam.d(), nd = n - d;
    const int nodes = lam.node_count();
    Section out(&lam, nd, false);
    NodeField immersed = section_to_immersion(lam, fb, s);
    std::vector<NodeStatus> status(lam.total_nodes());

    for_each_node((std::size_t)lam.total_nodes(), cfg.exec, [&](std::size_t g) {
        const int c = (int)(g / nodes), f = (int)(g % nodes);
        NodeStatus& st = status[g];
        try {
            Vec u = lam.node_params(f);
            if (lam.bump(u) == 0.0) {
                out.set_node_value(c, f, Vec::Zero(nd));
                return;
            }
            auto src = base.inverse(c, u);
            if (!src) {
                // truncation root: the preimage branch is unresolved, the node
                // stays on the base immersion
                out.set_node_value(c, f, Vec::Zero(nd));
                return;
            }
            auto [sc, su] = *src;
            const Vec x0 = lam.values[c].col(f);
            const Mat F = fb.frame_at(c, f);

            // unknowns: source leaf parameters u-, fiber coordinate xi at x
            Vec q(d + nd);
            q.head(d) = su;
            q.tail(nd) = s.node_value(c, f);

            Vec val;
            Eigen::MatrixXd dval;
            auto system = [&](const Vec& qq, Vec& R, Mat& J) {
                immersed.eval_jet(sc, qq.head(d), val, dval);
                Vec y = sys.raw(val);
                R = ambient_difference(sys.space, y, Vec(x0 + F * qq.tail(nd)));
                Mat Df = jacobian(sys, val);
                J.resize(n, d + nd);
                J.leftCols(d) = Df * dval;
                J.rightCols(nd) = -F;
            };
            NewtonOptions opt{cfg.newton_tol, cfg.newton_max, 0.5 * cfg.eta + 1e-6};
            auto res = newton_solve(q, system, opt);
            st.iterations = res.iterations;
            if (!res.converged) {
                st.failed = true;
                st.message = "Newton residual " + std::to_string(res.residual_norm);
                return;
            }
            if (q.tail(nd).norm() > cfg.eta) {
                st.failed = true;
                st.message = "fiber intersection outside the tube (|v| = " +
                             std::to_string(q.tail(nd).norm()) + " > eta)";
                return;
            }
            out.set_node_value(c, f, Vec(q.tail(nd)));
        } catch (const std::exception& e) {
            st.failed = true;
            st.message = e.what();
        }
    });
    collect(stats, status, lam);
    return out;
}

Section apply_bump(const DiscreteLamination& lam, const Section& s_new) {
    Section out = s_new;
    if (lam.marked.everything) return out;
    const int nodes = lam.node_count();
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; ++f) {
            double rho = lam.bump(lam.node_params(f));
            if (rho < 1.0) out.data(c).col(f) *= rho;
        }
    return out;
}

std::pair<Section, TransformReport> iterate_to_fixed_point(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const Section& s0, Variant variant, const PullbackRule& base, const TransformConfig& cfg) {
    if (variant == Variant::hyperbolic)
        fail(ErrorKind::input, "hyperbolic pipelines assemble their own fixed points");
    auto step = variant == Variant::expanded ? transform_expanded : transform_contracted;

    Section s = s0;
    TransformReport rep;
    double prev = -1;
    int rising = 0;
    for (int k = 1; k <= cfg.fixpoint_max; ++k) {
        Section raw = step(sys, lam, fb, s, base, cfg, &rep.newton);
        Section next = apply_bump(lam, raw);
        double dist = next.sup_distance(s);
        double ratio = (prev > 0) ? dist / prev : 0.0;
        rep.iterations.push_back({k, dist, ratio});
        s = std::move(next);
        if (dist <= cfg.fixpoint_tol) {
            rep.converged = true;
            rep.stop_reason = "sup distance below fixpoint_tol";
            break;
        }
        rising = (prev >= 0 && ratio >= 1.0) ? rising + 1 : 0;
        if (rising >= 5)
            fail(ErrorKind::non_contraction,
                 "sup-distance ratio >= 1 for 5 consecutive iterations (hypotheses violated)");
        prev = dist;
    }
    if (!rep.converged) rep.stop_reason = "iteration cap reached";

    // invariance residual: one extra unbumped half-step, measured where rho = 1
    Section raw = step(sys, lam, fb, s, base, cfg, &rep.newton);
    double res = 0;
    const int nodes = lam.node_count();
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; ++f) {
            if (lam.bump(lam.node_params(f)) < 1.0) continue;
            res = std::max(res, (raw.node_value(c, f) - s.node_value(c, f)).norm());
        }
    rep.final_residual = res;
    return {std::move(s), std::move(rep)};
}

PullbackPoint induced_pullback(const MapSystem& sys, const DiscreteLamination& lam,
                               const FrameBundle& fb, const NodeField& base_field,
                               const Section& s, const PullbackRule& base,
                               const TransformConfig& cfg, int code, int flat) {
    const int n = lam.n(), d = lam.d(), nd = n - d;

    Vec x = lam.values[code].col(flat) + fb.frame_at(code, flat) * s.node_value(code, flat);
    Vec y = sys.raw(x);
    auto [tc, tu] = base.forward(code, lam.node_params(flat));

    Vec q(d + nd);
    q.head(d) = tu;
    q.tail(nd) = Vec::Zero(nd);

    Vec val;
    Eigen::MatrixXd dval;
    auto system = [&](const Vec& qq, Vec& R, Mat& J) {
        base_field.eval_jet(tc, qq.head(d), val, dval);
        Mat F = fb.frame_eval(tc, qq.head(d));
        R = ambient_difference(sys.space, y, Vec(val + F * qq.tail(nd)));
        J.resize(n, d + nd);
        J.leftCols(d) = -dval; // frame variation enters at second order
        J.rightCols(nd) = -F;
    };
    NewtonOptions opt{cfg.newton_tol, 2 * cfg.newton_max, 1.0};
    auto res = newton_solve(q, system, opt);
    if (!res.converged)
        fail(ErrorKind::transversality,
             "pullback projection did not converge at code " + lam.codes[code].label() +
                 " node " + std::to_string(flat));

    PullbackPoint out;
    out.code = tc;
    out.u = q.head(d);
    Vec section_there = s.eval(tc, q.head(d));
    out.residual = (q.tail(nd) - section_there).norm();
    return out;
}

} // namespace lamina
