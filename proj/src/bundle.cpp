#include "lamina/bundle.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace lamina {

Mat FrameBundle::tangent_at(int code, int flat) const {
    return unpack_matrix(tangents.node_value(code, flat), n(), d());
}
Mat FrameBundle::frame_at(int code, int flat) const {
    return unpack_matrix(frames.node_value(code, flat), n(), n() - d());
}
Mat FrameBundle::tangent_eval(int code, const Vec& u) const {
    return unpack_matrix(tangents.eval(code, u), n(), d());
}
Mat FrameBundle::frame_eval(int code, const Vec& u) const {
    return unpack_matrix(frames.eval(code, u), n(), n() - d());
}

namespace {

double combined_condition(const Mat& T, const Mat& F) {
    Mat combined(T.rows(), T.cols() + F.cols());
    for (int k = 0; k < T.cols(); ++k) combined.col(k) = T.col(k).normalized();
    combined.rightCols(F.cols()) = F;
    Eigen::JacobiSVD<Mat> svd(combined);
    double smin = svd.singularValues().minCoeff();
    if (smin <= 0) return std::numeric_limits<double>::infinity();
    return svd.singularValues().maxCoeff() / smin;
}

Mat orthonormalize(const Mat& M) {
    Eigen::HouseholderQR<Mat> qr(M);
    Mat Q = qr.householderQ() * Mat::Identity(M.rows(), M.cols());
    // fix signs so the result depends continuously on M
    Mat R = qr.matrixQR().topRows(M.cols()).template triangularView<Eigen::Upper>();
    for (int k = 0; k < M.cols(); ++k)
        if (R(k, k) < 0) Q.col(k) = -Q.col(k);
    return Q;
}

// complement of span(T): last n-d columns of a full QR of T
Mat orthogonal_complement(const Mat& T) {
    Eigen::HouseholderQR<Mat> qr(T);
    Mat Q = qr.householderQ() * Mat::Identity(T.rows(), T.rows());
    return Q.rightCols(T.rows() - T.cols());
}

} // namespace

FrameBundle build_normal_frames(const DiscreteLamination& lam,
                                const std::optional<FrameHint>& hint) {
    const int n = lam.n(), d = lam.d();
    FrameBundle fb;
    fb.tangents = NodeField(&lam, n * d, false);
    fb.frames = NodeField(&lam, n * (n - d), false);

    NodeField base = immersion_field(lam);
    const int nodes = lam.node_count();

    Vec val;
    Eigen::MatrixXd deriv;
    for (int c = 0; c < lam.code_count(); ++c) {
        Mat prev_frame;
        for (int f = 0; f < nodes; ++f) {
            Vec u = lam.node_params(f);
            base.eval_jet(c, u, val, deriv);
            Mat T = deriv;
            fb.tangents.set_node_value(c, f, pack_matrix(T));

            Mat F;
            if (hint) {
                F = orthonormalize((*hint)(lam.codes[c], u));
            } else {
                F = orthogonal_complement(T);
                if (prev_frame.size()) {
                    // project the previous frame into the current complement to
                    // keep orientation/rotation continuous along the sweep
                    Mat proj = F * (F.transpose() * prev_frame);
                    F = orthonormalize(proj);
                }
                prev_frame = F;
            }
            double cond = combined_condition(T, F);
            if (cond > 1e6)
                fail(ErrorKind::geometry,
                     "frame not transverse to the leaf (condition " + std::to_string(cond) +
                         ") at code " + lam.codes[c].label() + " node " + std::to_string(f));
            fb.frames.set_node_value(c, f, pack_matrix(F));
        }
    }
    return fb;
}

NodeField section_to_immersion(const DiscreteLamination& lam, const FrameBundle& fb,
                               const Section& s) {
    NodeField out(&lam, lam.n(), true);
    const int nodes = lam.node_count();
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; ++f) {
            Mat F = fb.frame_at(c, f);
            out.set_node_value(c, f, Vec(lam.values[c].col(f) + F * s.node_value(c, f)));
        }
    return out;
}

PlaneField tangent_planes_fd(const DiscreteLamination& lam, const FrameBundle& fb,
                             const Section& s) {
    const int n = lam.n(), d = lam.d();
    PlaneField out(&lam, (n - d) * d, false);
    NodeField immersed = section_to_immersion(lam, fb, s);
    const int nodes = lam.node_count();
    Vec val;
    Eigen::MatrixXd deriv;
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < nodes; ++f) {
            immersed.eval_jet(c, lam.node_params(f), val, deriv);
            Mat TF(n, n);
            TF.leftCols(d) = fb.tangent_at(c, f);
            TF.rightCols(n - d) = fb.frame_at(c, f);
            Mat coeff = TF.partialPivLu().solve(Mat(deriv));
            out.set_node_value(c, f, pack_matrix(Mat(coeff.bottomRows(n - d))));
        }
    return out;
}

Section zero_section(const DiscreteLamination& lam) {
    return Section(&lam, lam.n() - lam.d(), false);
}

PlaneField zero_plane_field(const DiscreteLamination& lam) {
    return PlaneField(&lam, (lam.n() - lam.d()) * lam.d(), false);
}

double default_tube_radius(const DiscreteLamination& lam, double fallback) {
    auto primary = lam.primary_codes();
    if (primary.size() < 2) return fallback;
    double min_sep = std::numeric_limits<double>::infinity();
    const int nodes = lam.node_count();
    const int stride = std::max(1, nodes / 64);
    for (size_t a = 0; a < primary.size(); ++a)
        for (size_t b = a + 1; b < primary.size(); ++b)
            for (int f = 0; f < nodes; f += stride) {
                double dd = lam.space.distance(lam.values[primary[a]].col(f),
                                               lam.values[primary[b]].col(f));
                min_sep = std::min(min_sep, dd);
            }
    if (!std::isfinite(min_sep) || min_sep <= 0) return fallback;
    return std::max(0.25 * min_sep, 1e-3);
}

} // namespace lamina
