#include "lamina/tangent.hpp"

#include <random>

namespace lamina {

SplitBlocks split_jacobian(const Mat& Df, const Mat& T_src, const Mat& F_src, const Mat& T_tgt,
                           const Mat& F_tgt) {
    const int n = (int)Df.rows();
    const int d = (int)T_src.cols();
    Mat src(n, n), tgt(n, n);
    src.leftCols(d) = T_src;
    src.rightCols(n - d) = F_src;
    tgt.leftCols(d) = T_tgt;
    tgt.rightCols(n - d) = F_tgt;
    Mat M = tgt.partialPivLu().solve(Mat(Df * src));
    SplitBlocks B;
    B.hh = M.topLeftCorner(d, d);
    B.hv = M.topRightCorner(d, n - d);
    B.vh = M.bottomLeftCorner(n - d, d);
    B.vv = M.bottomRightCorner(n - d, n - d);
    return B;
}

namespace {

void check_invertible(const Mat& A, const char* which, ErrorKind kind) {
    Eigen::JacobiSVD<Mat> svd(A);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (smin <= 0 || smax / smin > 1e8)
        fail(kind, std::string(which) + " block is singular (condition > 1e8)");
}

} // namespace

Mat transport_plane_expanded(const SplitBlocks& B, const Mat& l_target) {
    Mat A = B.vv - l_target * B.hv;
    check_invertible(A, "normal-expansion", ErrorKind::geometry);
    return A.partialPivLu().solve(Mat(l_target * B.hh - B.vh));
}

Mat transport_plane_contracted(const SplitBlocks& B, const Mat& l_source) {
    Mat H = B.hh + B.hv * l_source;
    check_invertible(H, "horizontal (leaf immersion)", ErrorKind::geometry);
    Mat num = B.vh + B.vv * l_source;
    return H.transpose().partialPivLu().solve(Mat(num.transpose())).transpose();
}

Mat bump_leibniz(double rho, const Vec& rho_grad, const Vec& s_value, const Mat& l) {
    return rho * l + s_value * rho_grad.transpose();
}

std::pair<PlaneField, TransformReport> iterate_plane_field(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const Section& converged, Variant variant, const PullbackRule& base,
    const PlaneIterationConfig& cfg) {
    if (variant == Variant::hyperbolic)
        fail(ErrorKind::input, "plane iteration runs per expanded/contracted side");
    const int n = lam.n(), d = lam.d(), nd = n - d;
    const int nodes = lam.node_count();

    NodeField immersed = section_to_immersion(lam, fb, converged);
    PlaneField cur = zero_plane_field(lam);
    TransformReport rep;
    double prev = -1;
    int rising = 0;

    std::vector<std::string> failures((size_t)lam.total_nodes());
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        PlaneField next = zero_plane_field(lam);
        for_each_node((std::size_t)lam.total_nodes(), cfg.exec, [&](std::size_t g) {
            const int c = (int)(g / nodes), f = (int)(g % nodes);
            try {
                Vec u = lam.node_params(f);
                double rho = lam.bump(u);
                if (rho == 0.0) return; // outside V the object is the base
                Mat l_raw;
                if (variant == Variant::expanded) {
                    auto [tc, tu] = base.forward(c, u);
                    Mat Df = jacobian(sys, immersed.eval(c, u));
                    SplitBlocks B =
                        split_jacobian(Df, fb.tangent_at(c, f), fb.frame_at(c, f),
                                       fb.tangent_eval(tc, tu), fb.frame_eval(tc, tu));
                    Mat l_tgt = unpack_matrix(cur.eval(tc, tu), nd, d);
                    l_raw = transport_plane_expanded(B, l_tgt);
                } else {
                    auto src = base.inverse(c, u);
                    if (!src) return; // truncation root keeps the flat plane
                    auto [scode, su] = *src;
                    Mat Df = jacobian(sys, immersed.eval(scode, su));
                    SplitBlocks B =
                        split_jacobian(Df, fb.tangent_eval(scode, su), fb.frame_eval(scode, su),
                                       fb.tangent_at(c, f), fb.frame_at(c, f));
                    Mat l_src = unpack_matrix(cur.eval(scode, su), nd, d);
                    l_raw = transport_plane_contracted(B, l_src);
                }
                if (l_raw.norm() > cfg.eps_plane) {
                    failures[g] = "transported plane left the eps ball (|l| = " +
                                  std::to_string(l_raw.norm()) + ")";
                    return;
                }
                double inv_rho = rho > 0 ? 1.0 / rho : 0.0;
                Vec unbumped = inv_rho * converged.node_value(c, f);
                Mat l_new = bump_leibniz(rho, lam.bump_gradient(u), unbumped, l_raw);
                next.set_node_value(c, f, pack_matrix(l_new));
            } catch (const std::exception& e) {
                failures[g] = e.what();
            }
        });
        for (size_t g = 0; g < failures.size(); ++g)
            if (!failures[g].empty())
                fail(ErrorKind::geometry, "plane transport failed at node " + std::to_string(g) +
                                              ": " + failures[g]);
        double dist = next.sup_distance(cur);
        double ratio = prev > 0 ? dist / prev : 0.0;
        rep.iterations.push_back({k, dist, ratio});
        cur = std::move(next);
        if (dist <= cfg.tol) {
            rep.converged = true;
            rep.stop_reason = "plane sup change below tolerance";
            break;
        }
        rising = (prev >= 0 && ratio >= 1.0) ? rising + 1 : 0;
        if (rising >= 5) fail(ErrorKind::non_contraction, "plane transport stopped contracting");
        prev = dist;
    }
    if (!rep.converged) rep.stop_reason = "iteration cap reached";
    return {std::move(cur), std::move(rep)};
}

double HyperbolicityEstimate::lambda_at(int r) const {
    double v = 0;
    if (stable_rate_max > 0) {
        double denom = std::min(1.0, std::pow(tangent_rate_min, r));
        if (denom > 0) v = std::max(v, stable_rate_max / denom);
    }
    if (std::isfinite(unstable_rate_min)) {
        double numer = std::max(1.0, std::pow(tangent_rate_max, r));
        v = std::max(v, numer / unstable_rate_min);
    }
    return v;
}

HyperbolicityEstimate estimate_normal_hyperbolicity(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const FrameHint& stable, int stable_dim, const FrameHint& unstable, int unstable_dim,
    const PullbackRule& base, int orbit_len, int samples, int r_query, unsigned long seed) {
    const int n = lam.n(), d = lam.d();
    if (d + stable_dim + unstable_dim != n)
        fail(ErrorKind::input, "splitting dimensions must sum to the ambient dimension");
    if ((stable_dim > 0 && !stable) || (unstable_dim > 0 && !unstable))
        fail(ErrorKind::geometry, "missing subbundle hint for a nonzero splitting side");

    NodeField base_field = immersion_field(lam);
    HyperbolicityEstimate est;
    est.tangent_rate_min = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_code(0, lam.code_count() - 1);
    std::uniform_int_distribution<int> pick_node(0, lam.node_count() - 1);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);

    auto unit_directions = [&](int dim) {
        std::vector<Vec> dirs;
        for (int k = 0; k < dim; ++k) {
            Vec e = Vec::Zero(dim);
            e[k] = 1;
            dirs.push_back(e);
        }
        for (int extra = 0; extra < 2 * dim && dim > 1; ++extra) {
            Vec v(dim);
            for (int k = 0; k < dim; ++k) v[k] = coeff(rng);
            if (v.norm() > 1e-3) dirs.push_back(v.normalized());
        }
        return dirs;
    };

    int accepted = 0, attempts = 0;
    while (accepted < samples && attempts < 50 * samples) {
        ++attempts;
        int c = pick_code(rng), f = pick_node(rng);
        Vec u = lam.node_params(f);
        if (lam.bump(u) < 1.0) continue;

        int cc = c;
        Vec uu = u;
        bool used = false;
        for (int step = 0; step < orbit_len; ++step) {
            Mat T, T_img;
            std::pair<int, Vec> img;
            try {
                T = fb.tangent_eval(cc, uu);
                img = base.forward(cc, uu);
                T_img = fb.tangent_eval(img.first, img.second);
            } catch (const Error&) {
                break; // orbit left the chart
            }
            Mat Df = jacobian(sys, base_field.eval(cc, uu));

            for (const Vec& a : unit_directions(d)) {
                Vec t = T * a;
                double tn = t.norm();
                if (tn < 1e-12) continue;
                double rate = (Df * t).norm() / tn;
                est.tangent_rate_min = std::min(est.tangent_rate_min, rate);
                if (rate > est.tangent_rate_max) {
                    est.tangent_rate_max = rate;
                    est.worst_code = cc;
                    est.worst_node = f;
                }
            }
            if (stable_dim > 0) {
                Mat Es = stable(lam.codes[cc], uu);
                for (const Vec& a : unit_directions(stable_dim)) {
                    Vec v = Es * a;
                    if (v.norm() < 1e-12) continue;
                    est.stable_rate_max =
                        std::max(est.stable_rate_max, (Df * v).norm() / v.norm());
                }
            }
            if (unstable_dim > 0) {
                Mat Eu = unstable(lam.codes[cc], uu);
                Mat Eu_img = unstable(lam.codes[img.first], img.second);
                // projector onto E^u at the image, parallel to E^s + T
                Mat B(n, n);
                int col = 0;
                if (stable_dim > 0) {
                    Mat Es_img = stable(lam.codes[img.first], img.second);
                    for (int k = 0; k < stable_dim; ++k) B.col(col++) = Es_img.col(k);
                }
                for (int k = 0; k < d; ++k) B.col(col++) = T_img.col(k);
                for (int k = 0; k < unstable_dim; ++k) B.col(col++) = Eu_img.col(k);
                Eigen::PartialPivLU<Mat> lu(B);
                for (const Vec& a : unit_directions(unstable_dim)) {
                    Vec v = Eu * a;
                    if (v.norm() < 1e-12) continue;
                    Vec coords = lu.solve(Vec(Df * (v / v.norm())));
                    Vec proj = Eu_img * coords.tail(unstable_dim);
                    est.unstable_rate_min = std::min(est.unstable_rate_min, proj.norm());
                }
            }
            used = true;
            cc = img.first;
            uu = img.second;
        }
        if (used) ++accepted;
    }
    est.samples = accepted;
    if (accepted == 0) fail(ErrorKind::input, "no estimator samples inside the marked core");

    est.lambda = est.lambda_at(1);
    est.hyperbolic = est.lambda_at(0) * 1.05 < 1.0;
    est.r_max = 0;
    if (est.hyperbolic)
        for (int r = 1; r <= r_query; ++r) {
            if (est.lambda_at(r) * 1.05 < 1.0) est.r_max = r;
            else break;
        }
    return est;
}

double divided_difference_sup(const Section& s, int axis, int order) {
    const DiscreteLamination& lam = s.lam();
    const GridAxis& a = lam.axes[axis];
    const double h = a.spacing();
    const int m = a.count;
    const int nodes = lam.node_count();

    std::vector<double> binom(order + 1);
    binom[0] = 1;
    for (int i = 1; i <= order; ++i) binom[i] = binom[i - 1] * (order - i + 1) / i;

    int stride = 1;
    for (int k = 0; k < axis; ++k) stride *= lam.axes[k].count;

    auto fetch = [&](int code, int j, int rest) -> Vec {
        if (a.periodic) {
            const auto& mono = lam.monodromy[axis];
            while (j >= m) {
                j -= m;
                if (mono) code = mono->succ[code];
            }
            while (j < 0) {
                j += m;
                if (mono) code = mono->pred[code];
            }
        } else {
            j = std::clamp(j, 0, m - 1); // one-sided at the ends
        }
        return s.node_value(code, rest + stride * j);
    };

    double sup = 0;
    const double hk = std::pow(h, order);
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; ++f) {
            int j = (f / stride) % m;
            int rest = f - stride * j;
            Vec acc = Vec::Zero(s.channels());
            for (int i = 0; i <= order; ++i) {
                double sign = (order - i) % 2 ? -1.0 : 1.0;
                acc += sign * binom[i] * fetch(c, j + i, rest);
            }
            sup = std::max(sup, acc.cwiseAbs().maxCoeff() / hk);
        }
    return sup;
}

} // namespace lamina
