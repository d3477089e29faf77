#pragma once

#include <functional>
#include <vector>

#include "lamina/scenarios.hpp"

namespace lamina {

// Transversal distance between codes at given parameters (the preorbit metric
// for inverse-limit scenarios); empty means codes are never compared.
using CodeMetric = std::function<double(int, const Vec&, int, const Vec&)>;

struct InjectivityReport {
    double margin = std::numeric_limits<double>::infinity();
    double eps0 = 0;
    long pairs = 0;
    int code_a = -1, code_b = -1;
    Vec u_a, u_b;
    bool injective_at_resolution() const { return pairs > 0 && margin > 1e-9; }
};

// Minimum image distance over sampled point pairs at lamination distance
// greater than eps0. Systematic same-leaf scans catch the boundary pairs;
// seeded random pairs cover the rest.
InjectivityReport injectivity_margin(const DiscreteLamination& lam, const NodeField& immersed,
                                     double eps0, int sample_count, unsigned long seed,
                                     const CodeMetric& code_metric = nullptr);

struct ShadowResult {
    int code = -1;
    Vec leaf_params;       // z0
    double residual = 0;   // | i'(z0) - y0 |
    double leaf_offset = 0; // leafwise distance from x0 to z0
    bool ok = false;
};

// Conclusion-style shadowing: given an ambient f'-orbit eps-close to the base
// immersion of an f*-pseudo-orbit respecting plaques, projects the
// distinguished endpoint onto the immersed section.
ShadowResult shadow_check_forward(const MapSystem& sys, const DiscreteLamination& lam,
                                  const FrameBundle& fb, const Section& s,
                                  const std::vector<std::pair<int, Vec>>& pseudo_orbit,
                                  const std::vector<Vec>& ambient_orbit, double eps,
                                  const PullbackRule& base, const TransformConfig& cfg);

ShadowResult shadow_check_backward(const MapSystem& sys, const DiscreteLamination& lam,
                                   const FrameBundle& fb, const Section& s,
                                   const std::vector<std::pair<int, Vec>>& pseudo_preorbit,
                                   const std::vector<Vec>& ambient_preorbit, double eps,
                                   const PullbackRule& base, const TransformConfig& cfg);

// Gauss-Newton projection of an ambient point onto the immersed section near a
// seed node; the workhorse of the shadow and containment checks.
ShadowResult project_to_section(const DiscreteLamination& lam, const FrameBundle& fb,
                                const Section& s, const Vec& point, int seed_code,
                                const Vec& seed_u, const TransformConfig& cfg);

// Depth-preserving backward step (code, params, pad branch) -> preimage, used
// by the probe on contracted scenarios where the transversal expands backward.
using BackwardWalker = std::function<std::pair<int, Vec>(int, const Vec&, int)>;

struct ExpansivenessProbe {
    double eps = 0;
    double noise = 0;
    long trials = 0;
    long surviving_pairs = 0;
    // separation of surviving roots that cannot be absorbed into one plaque:
    // the transversal part for coded scenarios, the leafwise part otherwise
    double worst_root_separation = 0;
    double collapse_threshold = 0;
    bool collapsed = false;
    bool inconclusive = false;
    bool walked_backward = false;
    // sufficient condition: largest plaque size delta whose iterates keep
    // diameter <= eps over the probe horizon
    double delta_for_eps = 0;
    std::vector<double> diameter_growth;
};

ExpansivenessProbe plaque_expansiveness_probe(const DiscreteLamination& lam,
                                              const PullbackRule& base,
                                              const CodeMetric& code_metric, double eps,
                                              int trials, int length, unsigned long seed,
                                              const BackwardWalker& backward = nullptr,
                                              int pad_branches = 1);

struct ContainmentReport {
    long sampled = 0;
    long bounded = 0;
    long within = 0;
    long unresolved = 0; // beyond tol but below the truncation resolution
    double tol = 0;
    double worst = 0;    // largest resolved distance among bounded points
    double fraction() const {
        long resolved = bounded - unresolved;
        return resolved > 0 ? (double)within / resolved : 1.0;
    }
};

// Brute-force bounded-orbit containment: steps each sample with `step` (the
// map itself or its inverse), keeps those staying in `in_bounds`, and measures
// their distance to the immersed section.
ContainmentReport bounded_orbit_containment(
    const std::function<Vec(const Vec&)>& step, const std::function<bool(const Vec&)>& in_bounds,
    int steps, const std::vector<Vec>& samples, const DiscreteLamination& lam,
    const FrameBundle& fb, const Section& s,
    const std::function<std::pair<int, Vec>(const Vec&)>& seed_guess, double tol,
    double unresolved_sep, const TransformConfig& cfg);

} // namespace lamina
