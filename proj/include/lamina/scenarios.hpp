#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lamina/inverse_limit.hpp"
#include "lamina/transform.hpp"

namespace lamina {

using Params = std::map<std::string, double>;
using SubbundleHint = FrameHint;

// Extra data for the normally hyperbolic pipeline: strong stable/unstable
// directions and the base dynamics induced on disk thickenings along them.
struct HyperbolicData {
    Mat stable_basis;   // n x ds
    Mat unstable_basis; // n x du
    std::function<double(double)> stable_thick_fwd;
    std::function<double(double)> unstable_thick_fwd;
    std::function<double(double)> unstable_thick_inv;
};

// A catalog entry: the system pair (f, f'), the discretized base lamination,
// the analytic base dynamics on it, frames, and the declarations the complex
// and hyperbolic pipelines need.
struct Scenario {
    std::string name;
    StateSpace space;
    MapSystem base;
    MapSystem perturbed;
    Variant variant = Variant::expanded;
    std::shared_ptr<DiscreteLamination> lam;
    PullbackRule pullback;
    std::optional<FrameHint> frame_hint;
    double eta = 0.25;

    SubbundleHint stable_hint;   // empty when ds = 0
    SubbundleHint unstable_hint; // empty when du = 0
    int stable_dim = 0;
    int unstable_dim = 0;

    std::optional<HyperbolicData> hyper;
    std::vector<std::pair<int, int>> leaf_complex_axes;
    std::vector<std::pair<int, int>> fiber_complex_pairs;
    std::optional<DeformationFamily> family;
    std::optional<PreorbitScheme> scheme;
    Params params;

    const DiscreteLamination& lamination() const { return *lam; }
};

std::vector<std::string> scenario_names();

// Builds a catalog scenario. `nodes` is the main leaf axis resolution, `depth`
// the transversal truncation depth (ignored by trivial transversals).
// Unknown names and resolutions below 8 nodes per axis are input errors.
Scenario build_scenario(const std::string& name, Params params, int nodes, int depth);

// Perturbation sizes set to zero (f' = f), for unperturbed fixed-point runs.
Params unperturbed_params(const std::string& name);

// Transversal metric between codes at given parameters (truncated preorbit
// metric when the scenario has one, empty otherwise).
std::function<double(int, const Vec&, int, const Vec&)> scenario_code_metric(const Scenario& sc);

// Depth-preserving backward step (code, u, pad branch) for contracted
// scenarios; empty for scenarios without an invertible pullback.
std::function<std::pair<int, Vec>(int, const Vec&, int)> scenario_backward_walker(
    const Scenario& sc);

} // namespace lamina
