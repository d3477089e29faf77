#include "lamina/holo.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace lamina {

namespace {

Mat orthonormal_basis(const Mat& M) {
    Eigen::HouseholderQR<Mat> qr(M);
    return qr.householderQ() * Mat::Identity(M.rows(), M.cols());
}

} // namespace

ResidualReport j_invariance_residual(const DiscreteLamination& lam, const FrameBundle& fb,
                                     const PlaneField& pf) {
    if (!lam.space.has_complex())
        fail(ErrorKind::input, "ambient space declares no complex pairs");
    Mat J = lam.space.J_matrix();
    const int n = lam.n(), d = lam.d(), nd = n - d;
    ResidualReport rep;
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < lam.node_count(); ++f) {
            Mat l = unpack_matrix(pf.node_value(c, f), nd, d);
            Mat P = fb.tangent_at(c, f) + fb.frame_at(c, f) * l;
            Mat Q1 = orthonormal_basis(P);
            Mat Q2 = orthonormal_basis(Mat(J * P));
            // sine of the largest principal angle, computed directly so small
            // angles do not cancel against 1
            Mat ortho = Q2 - Q1 * (Q1.transpose() * Q2);
            Eigen::JacobiSVD<Mat> svd(ortho);
            double res = svd.singularValues().maxCoeff();
            if (res > rep.sup) {
                rep.sup = res;
                rep.worst_code = c;
                rep.worst_node = f;
            }
        }
    return rep;
}

ResidualReport holomorphy_residual_section(const DiscreteLamination& lam, const FrameBundle& fb,
                                           const Section& s,
                                           const std::vector<std::pair<int, int>>& leaf_pairs) {
    if (!lam.space.has_complex())
        fail(ErrorKind::input, "ambient space declares no complex pairs");
    if (leaf_pairs.empty())
        fail(ErrorKind::input, "no leaf complex pairs declared for this scenario");

    NodeField immersed = section_to_immersion(lam, fb, s);
    ResidualReport rep;
    double hmax = 0;
    for (auto [a1, a2] : leaf_pairs)
        hmax = std::max({hmax, lam.axes[a1].spacing(), lam.axes[a2].spacing()});
    rep.error_bar = hmax * hmax;

    Vec val;
    Eigen::MatrixXd deriv;
    for (int c = 0; c < lam.code_count(); ++c)
        for (int f = 0; f < lam.node_count(); ++f) {
            immersed.eval_jet(c, lam.node_params(f), val, deriv);
            double worst = 0;
            for (auto [a1, a2] : leaf_pairs)
                for (auto [re, im] : lam.space.complex_pairs) {
                    // d/d conj(u) of (v_re + i v_im) with u = u_a1 + i u_a2
                    double rr = 0.5 * (deriv(re, a1) - deriv(im, a2));
                    double ii = 0.5 * (deriv(im, a1) + deriv(re, a2));
                    worst = std::max(worst, std::hypot(rr, ii));
                }
            if (worst > rep.sup) {
                rep.sup = worst;
                rep.worst_code = c;
                rep.worst_node = f;
            }
        }
    return rep;
}

std::vector<std::complex<double>> default_t_grid(double radius, int rings, int angles) {
    std::vector<std::complex<double>> out{{0.0, 0.0}};
    for (int r = 1; r <= rings; ++r)
        for (int a = 0; a < angles; ++a) {
            double phi = kTwoPi * a / angles;
            out.push_back(std::polar(radius * r / rings, phi));
        }
    return out;
}

FamilyReport deform_family(const Scenario& sc, const DeformationFamily& family,
                           const std::vector<std::complex<double>>& t_grid, Variant variant,
                           const TransformConfig& cfg, std::vector<Section>* sections_out) {
    const auto& lam = sc.lamination();
    for (auto t : t_grid)
        if (std::abs(t) > family.disk_radius + 1e-12)
            fail(ErrorKind::input, "t grid point outside the family disk");

    auto fb = build_normal_frames(lam, sc.frame_hint);

    // spiral order: by modulus, then angle
    std::vector<size_t> order(t_grid.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double ra = std::abs(t_grid[a]), rb = std::abs(t_grid[b]);
        if (std::fabs(ra - rb) > 1e-14) return ra < rb;
        return std::arg(t_grid[a]) < std::arg(t_grid[b]);
    });

    FamilyReport rep;
    rep.points.resize(t_grid.size());
    std::vector<Section> sections(t_grid.size(), zero_section(lam));
    std::vector<bool> done(t_grid.size(), false);

    for (size_t oi = 0; oi < order.size(); ++oi) {
        size_t i = order[oi];
        std::complex<double> t = t_grid[i];
        // warm start from the nearest finished point
        Section s0 = zero_section(lam);
        double best = std::numeric_limits<double>::infinity();
        size_t best_j = SIZE_MAX;
        for (size_t j = 0; j < t_grid.size(); ++j)
            if (done[j] && std::abs(t_grid[j] - t) < best) {
                best = std::abs(t_grid[j] - t);
                best_j = j;
            }
        if (best_j != SIZE_MAX) s0 = sections[best_j];

        MapSystem ft = family.at(t);
        FamilyPointReport& pt = rep.points[i];
        pt.t = t;
        try {
            auto [s, r] = iterate_to_fixed_point(ft, lam, fb, s0, variant, sc.pullback, cfg);
            sections[i] = std::move(s);
            pt.converged = r.converged;
            pt.iterations = (int)r.iterations.size();
            pt.sup_distance = r.iterations.empty() ? 0 : r.iterations.back().sup_distance;
            pt.final_residual = r.final_residual;
            pt.section_sup = sections[i].sup_norm();
            done[i] = true;
            if (best_j != SIZE_MAX && best > 0)
                rep.coherence_constant =
                    std::max(rep.coherence_constant,
                             sections[i].sup_distance(sections[best_j]) / best);
        } catch (const Error& e) {
            if (std::abs(t) < 1e-14)
                fail(e.kind(), std::string("family center failed: ") + e.what());
            pt.converged = false;
        }
    }

    // largest ring radius with every point converged
    rep.converged_radius = family.disk_radius;
    for (const auto& pt : rep.points)
        if (!pt.converged) rep.converged_radius = std::min(rep.converged_radius, std::abs(pt.t));

    // warm/cold continuation check at the first off-center grid point
    for (size_t oi = 0; oi < order.size(); ++oi) {
        size_t i = order[oi];
        if (std::abs(t_grid[i]) < 1e-14 || !done[i]) continue;
        MapSystem ft = family.at(t_grid[i]);
        auto [cold, r] =
            iterate_to_fixed_point(ft, lam, fb, zero_section(lam), variant, sc.pullback, cfg);
        rep.warm_cold_gap = cold.sup_distance(sections[i]);
        if (rep.warm_cold_gap > 1e-8)
            fail(ErrorKind::continuation,
                 "warm- and cold-started sections disagree by " +
                     std::to_string(rep.warm_cold_gap) + " at t = (" +
                     std::to_string(t_grid[i].real()) + ", " + std::to_string(t_grid[i].imag()) +
                     ")");
        break;
    }

    // parameter Cauchy-Riemann defect per ring: the discrete contour integral
    //   (sum_j s_j (t_{j+1} - t_{j-1})/2) / (sum_j conj(t_j) (t_{j+1} - t_{j-1})/2)
    // extracts the conj(t)-coefficient of the section's t-dependence. It
    // annihilates holomorphic dependence of degree < angles-1 exactly and is
    // normalized so a pure conj(t) term reports coefficient 1.
    std::vector<std::pair<double, std::vector<size_t>>> rings;
    for (size_t i = 0; i < t_grid.size(); ++i) {
        double r = std::abs(t_grid[i]);
        if (r < 1e-14) continue;
        bool found = false;
        for (auto& [rr, v] : rings)
            if (std::fabs(rr - r) < 1e-12) {
                v.push_back(i);
                found = true;
                break;
            }
        if (!found) rings.push_back({r, {i}});
    }
    std::sort(rings.begin(), rings.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (!rings.empty() && !sc.fiber_complex_pairs.empty()) {
        const int nodes = lam.node_count();
        double max_spacing = 0;
        for (auto& [r, ring] : rings) {
            std::sort(ring.begin(), ring.end(), [&](size_t a, size_t b) {
                return std::arg(t_grid[a]) < std::arg(t_grid[b]);
            });
            const int na = (int)ring.size();
            if (na < 4) continue;
            bool all_ok = true;
            for (size_t i : ring) all_ok = all_ok && done[i];
            if (!all_ok) continue;

            std::complex<double> denom = 0;
            std::vector<std::complex<double>> weight(na);
            for (int a = 0; a < na; ++a) {
                std::complex<double> dt =
                    0.5 * (t_grid[ring[(a + 1) % na]] - t_grid[ring[(a + na - 1) % na]]);
                weight[a] = dt;
                denom += std::conj(t_grid[ring[a]]) * dt;
            }
            for (int c = 0; c < lam.code_count(); ++c)
                for (int f = 0; f < nodes; ++f)
                    for (auto [re, im] : sc.fiber_complex_pairs) {
                        std::complex<double> contour = 0;
                        for (int a = 0; a < na; ++a) {
                            Vec v = sections[ring[a]].node_value(c, f);
                            contour += std::complex<double>(v[re], v[im]) * weight[a];
                        }
                        rep.parameter_cr_sup =
                            std::max(rep.parameter_cr_sup, std::abs(contour / denom));
                    }
            max_spacing = std::max(max_spacing, r * kTwoPi / na);
        }
        rep.cr_error_bar = max_spacing * max_spacing;
    }

    if (sections_out) *sections_out = std::move(sections);
    return rep;
}

} // namespace lamina
