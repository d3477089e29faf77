#pragma once

#include <functional>
#include <optional>

#include "lamina/lamination.hpp"

namespace lamina {

// Per-node fiber coordinates (channels = n-d), in the node frame.
using Section = NodeField;
// Per-node (n-d) x d plane matrices in (leaf-tangent, frame) coordinates,
// packed column-major.
using PlaneField = NodeField;

inline Mat unpack_matrix(const Vec& v, int rows, int cols) {
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = v[c * rows + r];
    return m;
}

inline Vec pack_matrix(const Mat& m) {
    Vec v((int)(m.rows() * m.cols()));
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) v[c * (int)m.rows() + r] = m(r, c);
    return v;
}

// Leaf tangent bases and orthonormal transverse frames at every node.
struct FrameBundle {
    NodeField tangents; // n x d per node
    NodeField frames;   // n x (n-d) per node

    Mat tangent_at(int code, int flat) const;
    Mat frame_at(int code, int flat) const;
    Mat tangent_eval(int code, const Vec& u) const;
    Mat frame_eval(int code, const Vec& u) const;

    int n() const { return tangents.lam().n(); }
    int d() const { return tangents.lam().d(); }
};

using FrameHint = std::function<Mat(const TransversalCode&, const Vec&)>; // n x (n-d)

// Leaf tangents by differencing the stored immersion; frames either the
// orthonormalized hint or the aligned orthogonal complement of the tangents.
FrameBundle build_normal_frames(const DiscreteLamination& lam,
                                const std::optional<FrameHint>& hint = std::nullopt);

// Composed immersion i(x) + frame(x) * v(x) as an interpolable field.
NodeField section_to_immersion(const DiscreteLamination& lam, const FrameBundle& fb,
                               const Section& s);

// Graph representation of the section's tangent planes by finite differences
// of the composed immersion, in (tangent, frame) coordinates.
PlaneField tangent_planes_fd(const DiscreteLamination& lam, const FrameBundle& fb,
                             const Section& s);

Section zero_section(const DiscreteLamination& lam);
PlaneField zero_plane_field(const DiscreteLamination& lam);

// Default tube radius: a quarter of the minimal distance between distinct
// primary-code leaves at equal parameters, floored at 1e-3; fallback when the
// transversal is trivial.
double default_tube_radius(const DiscreteLamination& lam, double fallback);

} // namespace lamina
