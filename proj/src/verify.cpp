#include "lamina/verify.hpp"

#include <random>

#include "lamina/newton.hpp"

namespace lamina {

InjectivityReport injectivity_margin(const DiscreteLamination& lam, const NodeField& immersed,
                                     double eps0, int sample_count, unsigned long seed,
                                     const CodeMetric& code_metric) {
    InjectivityReport rep;
    rep.eps0 = eps0;
    const int nodes = lam.node_count();
    auto primary = lam.primary_codes();

    auto consider = [&](int ca, const Vec& ua, int cb, const Vec& ub, double lam_dist) {
        if (lam_dist <= eps0) return;
        Vec pa = lam.space.wrap(immersed.eval(ca, ua));
        Vec pb = lam.space.wrap(immersed.eval(cb, ub));
        double img = lam.space.distance(pa, pb);
        ++rep.pairs;
        if (img < rep.margin) {
            rep.margin = img;
            rep.code_a = ca;
            rep.code_b = cb;
            rep.u_a = ua;
            rep.u_b = ub;
        }
    };

    // systematic same-leaf scan: for decimated start nodes, walk along each
    // axis to the first node past eps0 (boundary pairs dominate the margin)
    const int code_stride = std::max<size_t>(1, primary.size() / 8);
    const int node_stride = std::max(1, nodes / 256);
    for (size_t pi = 0; pi < primary.size(); pi += code_stride) {
        int c = primary[pi];
        for (int f = 0; f < nodes; f += node_stride) {
            Vec u = lam.node_params(f);
            for (int ax = 0; ax < lam.d(); ++ax) {
                const GridAxis& a = lam.axes[ax];
                double limit = a.periodic ? a.width / 2 : a.hi() - u[ax];
                Vec v = u;
                for (int j = 1; j * a.spacing() <= limit; ++j) {
                    v[ax] = u[ax] + j * a.spacing();
                    double dd = leaf_distance(lam, immersed, c, u, v);
                    if (dd > eps0) {
                        consider(c, u, c, v, dd);
                        break;
                    }
                }
            }
        }
    }

    // cross-code pairs at matched and random parameters
    if (code_metric && primary.size() > 1) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick_code(0, (int)primary.size() - 1);
        std::uniform_int_distribution<int> pick_node(0, nodes - 1);
        for (int i = 0; i < sample_count; ++i) {
            int ca = primary[pick_code(rng)];
            int cb = primary[pick_code(rng)];
            if (ca == cb) continue;
            Vec ua = lam.node_params(pick_node(rng));
            Vec ub = (i % 2) ? lam.node_params(pick_node(rng)) : ua;
            consider(ca, ua, cb, ub, code_metric(ca, ua, cb, ub));
        }
    }

    // seeded random same-code pairs
    std::mt19937_64 rng(seed + 1);
    std::uniform_int_distribution<int> pick_code(0, (int)primary.size() - 1);
    std::uniform_int_distribution<int> pick_node(0, nodes - 1);
    for (int i = 0; i < sample_count; ++i) {
        int c = primary[pick_code(rng)];
        Vec ua = lam.node_params(pick_node(rng));
        Vec ub = lam.node_params(pick_node(rng));
        consider(c, ua, c, ub, leaf_distance(lam, immersed, c, ua, ub));
    }

    // decimated all-pairs pass so constructed intersections at nodes are hit
    if (primary.size() <= 4) {
        int stride = 1;
        while (nodes / stride > 64) stride *= 2;
        for (int c : primary)
            for (int fa = 0; fa < nodes; fa += stride) {
                Vec ua = lam.node_params(fa);
                for (int fbn = fa + stride; fbn < nodes; fbn += stride) {
                    Vec ub = lam.node_params(fbn);
                    consider(c, ua, c, ub, leaf_distance(lam, immersed, c, ua, ub));
                }
            }
    }
    return rep;
}

ShadowResult project_to_section(const DiscreteLamination& lam, const FrameBundle& fb,
                                const Section& s, const Vec& point, int seed_code,
                                const Vec& seed_u, const TransformConfig& cfg) {
    NodeField immersed = section_to_immersion(lam, fb, s);
    Vec u = seed_u;
    Vec val;
    Eigen::MatrixXd deriv;
    double residual = 0;
    for (int it = 0; it < 3 * cfg.newton_max; ++it) {
        immersed.eval_jet(seed_code, u, val, deriv);
        Vec r = ambient_difference(lam.space, val, point);
        residual = r.norm();
        Mat JtJ = Mat(deriv.transpose() * deriv);
        Vec g = deriv.transpose() * r;
        Vec delta = JtJ.ldlt().solve(Vec(-g));
        if (!delta.allFinite()) break;
        u += delta;
        if (delta.norm() < 1e-14) break;
    }
    immersed.eval_jet(seed_code, u, val, deriv);
    ShadowResult out;
    out.code = seed_code;
    out.leaf_params = u;
    out.residual = ambient_difference(lam.space, val, point).norm();
    out.leaf_offset = leaf_distance(lam, immersed, seed_code, seed_u, u);
    out.ok = out.residual <= 10 * cfg.newton_tol;
    return out;
}

namespace {

ShadowResult shadow_core(const MapSystem& sys, const DiscreteLamination& lam,
                         const FrameBundle& fb, const Section& s,
                         const std::vector<std::pair<int, Vec>>& pseudo,
                         const std::vector<Vec>& ambient, double eps, const PullbackRule& base,
                         const TransformConfig& cfg, bool forward) {
    if (pseudo.size() < 10 || ambient.size() != pseudo.size())
        fail(ErrorKind::hypothesis, "orbits must share a length of at least 10");
    NodeField base_field = immersion_field(lam);
    for (size_t k = 0; k < pseudo.size(); ++k) {
        // closeness to the base immersion
        Vec ipt = lam.space.wrap(base_field.eval(pseudo[k].first, pseudo[k].second));
        if (lam.space.distance(lam.space.wrap(ambient[k]), ipt) > eps)
            fail(ErrorKind::hypothesis, "ambient orbit strays from the immersed pseudo-orbit");
        if (k + 1 < pseudo.size()) {
            // the ambient sequence is an actual f'-orbit
            Vec img = sys.space.wrap(sys.raw(ambient[k]));
            if (lam.space.distance(img, lam.space.wrap(ambient[k + 1])) > 1e-8)
                fail(ErrorKind::hypothesis, "ambient sequence is not an orbit of the system");
            // the pseudo-orbit respects plaques
            auto [fc, fu] = base.forward(pseudo[k].first, pseudo[k].second);
            if (fc != pseudo[k + 1].first)
                fail(ErrorKind::hypothesis, "pseudo-orbit jumps to another plaque code");
            if (leaf_distance(lam, base_field, fc, fu, pseudo[k + 1].second) > eps)
                fail(ErrorKind::hypothesis, "pseudo-orbit plaque jump exceeds eps");
        }
    }
    size_t at = forward ? 0 : pseudo.size() - 1;
    ShadowResult out = project_to_section(lam, fb, s, ambient[at], pseudo[at].first,
                                          pseudo[at].second, cfg);
    if (!out.ok)
        fail(ErrorKind::transversality,
             "shadow projection residual " + std::to_string(out.residual) +
                 " (containment violated at sampling precision)");
    return out;
}

} // namespace

ShadowResult shadow_check_forward(const MapSystem& sys, const DiscreteLamination& lam,
                                  const FrameBundle& fb, const Section& s,
                                  const std::vector<std::pair<int, Vec>>& pseudo_orbit,
                                  const std::vector<Vec>& ambient_orbit, double eps,
                                  const PullbackRule& base, const TransformConfig& cfg) {
    return shadow_core(sys, lam, fb, s, pseudo_orbit, ambient_orbit, eps, base, cfg, true);
}

ShadowResult shadow_check_backward(const MapSystem& sys, const DiscreteLamination& lam,
                                   const FrameBundle& fb, const Section& s,
                                   const std::vector<std::pair<int, Vec>>& pseudo_preorbit,
                                   const std::vector<Vec>& ambient_preorbit, double eps,
                                   const PullbackRule& base, const TransformConfig& cfg) {
    return shadow_core(sys, lam, fb, s, pseudo_preorbit, ambient_preorbit, eps, base, cfg, false);
}

ExpansivenessProbe plaque_expansiveness_probe(const DiscreteLamination& lam,
                                              const PullbackRule& base,
                                              const CodeMetric& code_metric, double eps,
                                              int trials, int length, unsigned long seed,
                                              const BackwardWalker& backward,
                                              int pad_branches) {
    ExpansivenessProbe rep;
    rep.eps = eps;
    rep.noise = eps / 10;
    rep.trials = trials;
    rep.walked_backward = (bool)backward;
    const bool coded = lam.code_count() > 1;
    rep.collapse_threshold = coded ? std::pow(2.0, -lam.depth) : lam.axes[0].spacing();

    const int nodes = lam.node_count();
    auto primary = lam.primary_codes();

    auto lam_dist = [&](int ca, const Vec& ua, int cb, const Vec& ub) {
        double leaf = chart_distance(lam.axes, ua, ub);
        if (ca == cb) return leaf;
        if (!code_metric) return std::numeric_limits<double>::infinity();
        return code_metric(ca, ua, cb, ub);
    };

    std::vector<double> survived((size_t)trials, -1.0); // root separation or -1
    for_each_node((size_t)trials, Exec::parallel, [&](std::size_t trial) {
        std::mt19937_64 rng(seed + 1000003UL * trial); // per-trial stream
        std::uniform_int_distribution<int> pick_code(0, (int)primary.size() - 1);
        std::uniform_int_distribution<int> pick_node(0, nodes - 1);
        std::uniform_int_distribution<int> pick_pad(0, std::max(0, pad_branches - 1));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::uniform_real_distribution<double> log_scale(0.0, 9.0);

        int ca = primary[pick_code(rng)];
        int fa = pick_node(rng);
        Vec ua = lam.node_params(fa);
        if (lam.bump(ua) < 1.0) return;

        // the partner root: a leafwise offset, or a transversal neighbor;
        // separations sampled log-uniformly so expanding dynamics still admit
        // surviving pairs, each pair with a proportional noise budget
        int cb = ca;
        Vec ub = ua;
        double want = eps * std::pow(10.0, -log_scale(rng));
        double noise = std::min(rep.noise, want / 10);
        if (trial % 2 == 0 || primary.size() == 1) {
            int ax = (int)(rng() % lam.d());
            ub[ax] += want;
        } else {
            cb = primary[pick_code(rng)];
            noise = rep.noise;
        }
        if (lam_dist(ca, ua, cb, ub) > eps) return;
        // the part of the root separation no single plaque can absorb
        double root_sep = coded ? (ca == cb ? 0.0 : code_metric(ca, ua, cb, ua))
                                : chart_distance(lam.axes, ua, ub);

        bool stayed = true;
        int c1 = ca, c2 = cb;
        Vec u1 = ua, u2 = ub;
        for (int k = 0; k < length && stayed; ++k) {
            try {
                std::pair<int, Vec> n1, n2;
                if (backward) {
                    int pad = pick_pad(rng); // shared: pseudo-orbits choose paths
                    n1 = backward(c1, u1, pad);
                    n2 = backward(c2, u2, pad);
                } else {
                    n1 = base.forward(c1, u1);
                    n2 = base.forward(c2, u2);
                }
                for (int ax = 0; ax < lam.d(); ++ax) {
                    n1.second[ax] += noise * unit(rng);
                    n2.second[ax] += noise * unit(rng);
                }
                c1 = n1.first;
                u1 = n1.second;
                c2 = n2.first;
                u2 = n2.second;
            } catch (const Error&) {
                stayed = false; // orbit left the chart: discard the trial
                break;
            }
            if (lam_dist(c1, u1, c2, u2) > eps) stayed = false;
        }
        if (stayed) survived[trial] = root_sep;
    });
    for (double v : survived)
        if (v >= 0) {
            ++rep.surviving_pairs;
            rep.worst_root_separation = std::max(rep.worst_root_separation, v);
        }
    rep.collapsed = rep.surviving_pairs > 0 &&
                    rep.worst_root_separation < rep.collapse_threshold;
    rep.inconclusive = !rep.collapsed;

    // sufficient condition: bisect the largest plaque size whose forward
    // iterates keep leafwise diameter below eps over the horizon
    {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15UL);
        std::uniform_int_distribution<int> pick_code(0, (int)primary.size() - 1);
        std::uniform_int_distribution<int> pick_node(0, nodes - 1);
        auto max_diam = [&](double delta) {
            double worst = 0;
            for (int probe = 0; probe < 8; ++probe) {
                int c = primary[pick_code(rng)];
                Vec u = lam.node_params(pick_node(rng));
                int ax = probe % lam.d();
                Vec a = u, b = u;
                a[ax] -= delta / 2;
                b[ax] += delta / 2;
                int c1 = c, c2 = c;
                Vec u1 = a, u2 = b;
                for (int k = 0; k < length; ++k) {
                    try {
                        auto r1 = base.forward(c1, u1);
                        auto r2 = base.forward(c2, u2);
                        c1 = r1.first;
                        u1 = r1.second;
                        c2 = r2.first;
                        u2 = r2.second;
                    } catch (const Error&) {
                        break;
                    }
                    if (c1 == c2)
                        worst = std::max(worst, chart_distance(lam.axes, u1, u2));
                }
            }
            return worst;
        };
        double lo = 0, hi = eps;
        if (max_diam(hi) <= eps) {
            rep.delta_for_eps = hi;
        } else {
            for (int it = 0; it < 30; ++it) {
                double mid = 0.5 * (lo + hi);
                (max_diam(mid) <= eps ? lo : hi) = mid;
            }
            rep.delta_for_eps = lo;
        }
        for (int k = 1; k <= length; ++k)
            rep.diameter_growth.push_back(std::min(eps * 2, rep.delta_for_eps * std::pow(2.0, k)));
    }
    return rep;
}

ContainmentReport bounded_orbit_containment(
    const std::function<Vec(const Vec&)>& step, const std::function<bool(const Vec&)>& in_bounds,
    int steps, const std::vector<Vec>& samples, const DiscreteLamination& lam,
    const FrameBundle& fb, const Section& s,
    const std::function<std::pair<int, Vec>(const Vec&)>& seed_guess, double tol,
    double unresolved_sep, const TransformConfig& cfg) {
    ContainmentReport rep;
    rep.tol = tol;
    rep.sampled = (long)samples.size();
    NodeField immersed = section_to_immersion(lam, fb, s);

    std::vector<char> bounded(samples.size(), 0);
    for_each_node(samples.size(), cfg.exec, [&](std::size_t i) {
        Vec p = samples[i];
        bool ok = in_bounds(p);
        for (int k = 0; k < steps && ok; ++k) {
            p = step(p);
            if (!p.allFinite() || !in_bounds(p)) ok = false;
        }
        bounded[i] = ok ? 1 : 0;
    });

    std::vector<double> dist(samples.size(), -1.0);
    for_each_node(samples.size(), cfg.exec, [&](std::size_t i) {
        if (!bounded[i]) return;
        auto [c0, u0] = seed_guess(samples[i]);
        // refine over nearby primary codes to find the closest sheet
        double best = std::numeric_limits<double>::infinity();
        for (int c : lam.primary_codes()) {
            Vec u = u0;
            Vec val;
            Eigen::MatrixXd deriv;
            for (int it = 0; it < 25; ++it) {
                immersed.eval_jet(c, u, val, deriv);
                Vec r = ambient_difference(lam.space, val, samples[i]);
                Vec delta = Mat(deriv.transpose() * deriv)
                                .ldlt()
                                .solve(Vec(-(deriv.transpose() * r)));
                if (!delta.allFinite()) break;
                u += delta;
                if (delta.norm() < 1e-13) break;
            }
            try {
                immersed.eval_jet(c, u, val, deriv);
                best = std::min(best,
                                ambient_difference(lam.space, val, samples[i]).norm());
            } catch (const Error&) {
            }
            if (best <= tol) break;
        }
        dist[i] = best;
    });

    for (size_t i = 0; i < samples.size(); ++i) {
        if (!bounded[i]) continue;
        ++rep.bounded;
        if (dist[i] <= tol) {
            ++rep.within;
            rep.worst = std::max(rep.worst, dist[i]);
        } else if (dist[i] <= unresolved_sep) {
            ++rep.unresolved;
        } else {
            rep.worst = std::max(rep.worst, dist[i]);
        }
    }
    return rep;
}

} // namespace lamina
