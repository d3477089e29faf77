#pragma once

#include "lamina/transform.hpp"

namespace lamina {

// Graph transport of d-planes written as (n-d) x d matrices over the
// (leaf-tangent, frame) splitting. Blocks of the ambient Jacobian in the
// source/target splittings:
//   [hh hv; vh vv] = [T_tgt F_tgt]^-1 Df [T_src F_src].
struct SplitBlocks {
    Mat hh, hv, vh, vv;
};

SplitBlocks split_jacobian(const Mat& Df, const Mat& T_src, const Mat& F_src, const Mat& T_tgt,
                           const Mat& F_tgt);

// Backward transport (preimage of a plane at the forward image point):
// l' = (vv - l hv)^-1 (l hh - vh).
Mat transport_plane_expanded(const SplitBlocks& B, const Mat& l_target);

// Forward pushforward: l' = (vh + vv l)(hh + hv l)^-1.
Mat transport_plane_contracted(const SplitBlocks& B, const Mat& l_source);

// Product-rule correction for the bump factor: rho * l + s_value (x) grad_rho.
Mat bump_leibniz(double rho, const Vec& rho_grad, const Vec& s_value, const Mat& l);

struct PlaneIterationConfig {
    double eps_plane = 0.5; // transported planes must stay in this ball
    double tol = 1e-10;
    int max_iterations = 200;
    Exec exec = Exec::parallel;
};

// Fixed point of the plane transport over a converged section: the tangent
// planes of the persistent immersion in graph coordinates.
std::pair<PlaneField, TransformReport> iterate_plane_field(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const Section& converged, Variant variant, const PullbackRule& base,
    const PlaneIterationConfig& cfg);

struct HyperbolicityEstimate {
    double lambda = 0;       // measured at r = 1
    int r_max = 0;
    bool hyperbolic = false; // false when even r = 0 fails with margin
    long samples = 0;
    double stable_rate_max = 0;
    double tangent_rate_min = 0;
    double tangent_rate_max = 0;
    double unstable_rate_min = std::numeric_limits<double>::infinity();
    int worst_code = -1;
    int worst_node = -1;

    double lambda_at(int r) const;
};

// Measures the splitting rates of the (unperturbed) system along base orbits
// and returns the worst ratios plus the largest r passing both domination
// inequalities with a 5% margin. Hints supply the raw (non-orthonormal)
// stable/unstable subspaces; pass empty functions for zero-dimensional sides.
HyperbolicityEstimate estimate_normal_hyperbolicity(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const FrameHint& stable, int stable_dim, const FrameHint& unstable, int unstable_dim,
    const PullbackRule& base, int orbit_len, int samples, int r_query, unsigned long seed);

// sup over nodes of |Delta^order v| / h^order along `axis`, monodromy-aware.
double divided_difference_sup(const Section& s, int axis, int order);

} // namespace lamina
