#pragma once

#include <complex>

#include "lamina/scenarios.hpp"

namespace lamina {

struct ResidualReport {
    double sup = 0;
    double error_bar = 0; // O(h^2) finite-difference bar where applicable
    int worst_code = -1;
    int worst_node = -1;
};

// Largest principal-angle sine between J * (plane basis) and the plane span,
// per node; the plane is the graph of the plane field over the (tangent,
// frame) splitting. Zero means J-invariant.
ResidualReport j_invariance_residual(const DiscreteLamination& lam, const FrameBundle& fb,
                                     const PlaneField& pf);

// Cauchy-Riemann residual of the composed section immersion along the declared
// leaf complex pairs, by finite differences at the grid spacing.
ResidualReport holomorphy_residual_section(const DiscreteLamination& lam, const FrameBundle& fb,
                                           const Section& s,
                                           const std::vector<std::pair<int, int>>& leaf_pairs);

std::vector<std::complex<double>> default_t_grid(double radius, int rings = 2, int angles = 8);

struct FamilyPointReport {
    std::complex<double> t;
    bool converged = false;
    double sup_distance = 0;
    double final_residual = 0;
    int iterations = 0;
    double section_sup = 0;
};

struct FamilyReport {
    std::vector<FamilyPointReport> points;
    double parameter_cr_sup = 0; // sup |d(section)/d tbar| at interior ring points
    double cr_error_bar = 0;
    double warm_cold_gap = 0;    // warm- vs cold-start disagreement at a sample t
    double converged_radius = 0; // largest ring radius with every point converged
    double coherence_constant = 0; // sup |s_t - s_t'| / |t - t'| over warm-start edges
};

// Runs the r=1 pipeline over a parameter disk grid with warm starts spiraling
// out from the center, then estimates the parameter Cauchy-Riemann defect on
// the ring lattice. Sections are returned through `sections_out` in t_grid
// order when requested.
FamilyReport deform_family(const Scenario& sc, const DeformationFamily& family,
                           const std::vector<std::complex<double>>& t_grid, Variant variant,
                           const TransformConfig& cfg,
                           std::vector<Section>* sections_out = nullptr);

} // namespace lamina
