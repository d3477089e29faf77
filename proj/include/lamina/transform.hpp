#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lamina/bundle.hpp"
#include "lamina/exec.hpp"
#include "lamina/map_system.hpp"

namespace lamina {

enum class Variant { expanded, contracted, hyperbolic };

// Analytic base dynamics on the lamination: code index + leaf parameters in,
// same out. `inverse` is empty at the truncation root (value stays at the base).
struct PullbackRule {
    std::function<std::pair<int, Vec>(int, const Vec&)> forward;
    std::function<std::optional<std::pair<int, Vec>>(int, const Vec&)> inverse;
    bool invertible = false;
};

struct TransformConfig {
    double eta = 0.25;         // plaque/tube radius
    double newton_tol = 1e-12;
    int newton_max = 30;
    double fixpoint_tol = 1e-11;
    int fixpoint_max = 200;
    Exec exec = Exec::parallel;

    void validate() const {
        if (!(newton_tol > 0 && newton_tol < eta))
            fail(ErrorKind::input, "require 0 < newton_tol < eta");
    }
};

struct IterationRecord {
    int k;
    double sup_distance;
    double ratio; // sup_distance(k)/sup_distance(k-1), 0 on the first record
};

struct NewtonStats {
    int max_iterations = 0;
    long failures = 0;
};

struct TransformReport {
    std::vector<IterationRecord> iterations;
    double final_residual = 0;
    NewtonStats newton;
    bool converged = false;
    std::string stop_reason;
};

// One application of the unbumped operator. Expanded: per node x solve for the
// fiber coordinate v with f'(I(x,v)) on the immersed plaque of s around the
// forward image of x. Contracted: solve for the source leaf parameter whose
// image under f' lands in the fiber of x; the fiber coordinate there is the
// new value. Nodes with zero bump (or an exhausted pullback) keep the zero
// section.
Section transform_expanded(const MapSystem& sys, const DiscreteLamination& lam,
                           const FrameBundle& fb, const Section& s, const PullbackRule& base,
                           const TransformConfig& cfg, NewtonStats* stats = nullptr);

Section transform_contracted(const MapSystem& sys, const DiscreteLamination& lam,
                             const FrameBundle& fb, const Section& s, const PullbackRule& base,
                             const TransformConfig& cfg, NewtonStats* stats = nullptr);

// Bump localization: rho(x) * s_new(x) on V, zero outside.
Section apply_bump(const DiscreteLamination& lam, const Section& s_new);

std::pair<Section, TransformReport> iterate_to_fixed_point(
    const MapSystem& sys, const DiscreteLamination& lam, const FrameBundle& fb,
    const Section& s0, Variant variant, const PullbackRule& base, const TransformConfig& cfg);

struct PullbackPoint {
    int code = -1;
    Vec u;
    double residual = 0; // | f'(i'(x)) - i'(f'*(x)) |
};

// Leaf coordinates of the induced dynamics f'* at a node of the converged
// section: projects f'(i'(x)) into the fiber bundle over the plaque at f*(x).
// `base_field` is the stored base immersion (immersion_field(lam)), built once
// by the caller.
PullbackPoint induced_pullback(const MapSystem& sys, const DiscreteLamination& lam,
                               const FrameBundle& fb, const NodeField& base_field,
                               const Section& s, const PullbackRule& base,
                               const TransformConfig& cfg, int code, int flat);

} // namespace lamina
