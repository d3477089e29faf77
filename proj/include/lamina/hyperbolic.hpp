#pragma once

#include "lamina/scenarios.hpp"
#include "lamina/tangent.hpp"

namespace lamina {

// A base lamination with extra leaf axes spanning a strong stable or unstable
// disk, together with the converged graph-transform section over it.
struct ThickenedLamination {
    std::shared_ptr<DiscreteLamination> lam;
    FrameBundle frames;
    Section section;
    PullbackRule pullback;
    TransformReport report;
    int thick_axes = 0;
};

// Appends one line axis per basis column; the immersion becomes
// i(u) + basis * a over the disk [-radius, radius]^k.
DiscreteLamination thicken(const DiscreteLamination& base, const Mat& basis, double radius,
                           int nodes_per_axis);

ThickenedLamination build_stable_lamination(const Scenario& sc, double disk_radius,
                                            const TransformConfig& cfg);
ThickenedLamination build_unstable_lamination(const Scenario& sc, double disk_radius,
                                              const TransformConfig& cfg);

struct IntersectionPoint {
    Vec fiber;              // coordinate of i(f')(x) in the base fiber
    double margin = 0;      // smallest singular value of the stacked tangents
};

// Transverse intersection of the two thickened immersions inside the base
// fiber at a node.
IntersectionPoint intersect_transverse(const ThickenedLamination& stable,
                                       const ThickenedLamination& unstable,
                                       const DiscreteLamination& base_lam,
                                       const FrameBundle& base_fb, int code, int flat,
                                       const TransformConfig& cfg);

struct PullbackEntry {
    int code = -1, flat = -1;
    int image_code = -1;
    Vec image_u;
    double residual = 0;
};

struct HyperbolicResult {
    Section section;                   // i(f') over the base lamination
    TransformReport stable_report;
    TransformReport unstable_report;
    std::vector<PullbackEntry> pullback_table;
    double diagram_residual = 0;       // sup |f'(i'(x)) - i'(f'*(x))|
    double min_margin = 0;
    HyperbolicityEstimate estimate;
};

// Full normally hyperbolic pipeline: estimator gate, both thickened builds,
// per-node intersections, induced pullback and the commutation residual.
// Degenerates to the single-sided pipeline when a splitting side is empty.
HyperbolicResult persist_hyperbolic(const Scenario& sc, const TransformConfig& cfg,
                                    double disk_radius = 0, int disk_nodes = 17);

} // namespace lamina
