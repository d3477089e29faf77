#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lamina/lamination.hpp"

namespace lamina {

// Truncated preorbit space of a branched covering of the leaf chart.
// `branches(u)` returns every chart preimage of u in a fixed order; symbols of
// a TransversalCode pick branches, most recent preimage first.
struct PreorbitScheme {
    std::vector<GridAxis> axes; // leaf chart axes
    StateSpace space;           // ambient space of the immersion
    std::function<Vec(const Vec&)> base_map;              // chart self-map
    std::function<std::vector<Vec>(const Vec&)> branches; // all chart preimages
    std::function<Vec(const Vec&)> embed;                 // chart -> ambient point
    int branch_count = 1;
    int depth = 0;
    double region_margin = 1e-3;
};

// Distance on the leaf chart (angle-aware per axis).
double chart_distance(const std::vector<GridAxis>& axes, const Vec& a, const Vec& b);

// The preimage history (p_0 = u, p_1, ..., p_depth) selected by `code` at u.
std::vector<Vec> preorbit_chain(const PreorbitScheme& s, const TransversalCode& code,
                                const Vec& u);

// Index of the branch of `target` whose value matches `known_preimage`.
int match_branch(const PreorbitScheme& s, const Vec& target, const Vec& known_preimage);

// Transversal metric between two truncated preorbits:
//   sum_{n>=0} min(d(p_n, q_n), 1) / 2^n  over the shared depth.
double preorbit_distance(const PreorbitScheme& s, const TransversalCode& c1, const Vec& u1,
                         const TransversalCode& c2, const Vec& u2);

// Builds the discrete lamination: code tree of all words of length <= depth,
// base immersion values, and the monodromy of every periodic axis traced by
// branch continuation around the axis loop.
DiscreteLamination build_preorbit_space(const PreorbitScheme& s);

// Depth-preserving shifts on full-depth codes (round trip is the identity).
// Forward: the image point's newest branch is prepended, the deepest symbol
// dropped. Inverse: consumes the newest branch, appends `tail_branch`.
struct ShiftResult {
    TransversalCode code;
    Vec u;
};
ShiftResult shift_forward(const PreorbitScheme& s, const TransversalCode& code, const Vec& u);
ShiftResult shift_inverse(const PreorbitScheme& s, const TransversalCode& code, const Vec& u,
                          int tail_branch);

// Tree-aware shifts used by the transform pipelines: forward grows the word
// (capped at scheme depth), inverse shrinks it and bottoms out at the root.
ShiftResult tree_forward(const PreorbitScheme& s, const TransversalCode& code, const Vec& u);
std::optional<ShiftResult> tree_inverse(const PreorbitScheme& s, const TransversalCode& code,
                                        const Vec& u);

} // namespace lamina
