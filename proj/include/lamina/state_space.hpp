#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "lamina/errors.hpp"

namespace lamina {

// Small dense types with stack storage. Ambient dimensions here stay tiny
// (n <= 4, composite Newton systems up to 2n).
constexpr int kMaxDim = 12;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0) w += kTwoPi;
    // fmod can return exactly 2*pi after the correction when a is a tiny
    // negative number
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// Distance between two angles along the circle.
inline double angle_distance(double a, double b) {
    double d = std::fabs(wrap_angle(a) - wrap_angle(b));
    return d > std::numbers::pi ? kTwoPi - d : d;
}

enum class Factor { line, angle };

// Flat-chart ambient space: a product of lines and circles, with an optional
// complex structure J given by (re, im) coordinate pairs.
struct StateSpace {
    int n = 0;
    std::vector<Factor> kinds;
    std::vector<std::pair<int, int>> complex_pairs;

    static StateSpace lines(int n) {
        StateSpace s;
        s.n = n;
        s.kinds.assign(n, Factor::line);
        return s;
    }

    void validate() const {
        if (n < 1) fail(ErrorKind::input, "state space needs n >= 1");
        if ((int)kinds.size() != n) fail(ErrorKind::input, "factor_kinds size mismatch");
        std::vector<int> used(n, 0);
        for (auto [re, im] : complex_pairs) {
            if (re < 0 || re >= n || im < 0 || im >= n || re == im)
                fail(ErrorKind::input, "complex pair index out of range");
            if (used[re]++ || used[im]++)
                fail(ErrorKind::input, "coordinate in more than one complex pair");
            if (kinds[re] == Factor::angle || kinds[im] == Factor::angle)
                fail(ErrorKind::input, "angle coordinate inside a complex pair");
        }
    }

    Vec wrap(Vec x) const {
        for (int k = 0; k < n; ++k)
            if (kinds[k] == Factor::angle) x[k] = wrap_angle(x[k]);
        return x;
    }

    // Distance respecting angle factors (geodesic on circle coordinates).
    double distance(const Vec& a, const Vec& b) const {
        double s = 0;
        for (int k = 0; k < n; ++k) {
            double d = kinds[k] == Factor::angle ? angle_distance(a[k], b[k]) : a[k] - b[k];
            s += d * d;
        }
        return std::sqrt(s);
    }

    bool has_complex() const { return !complex_pairs.empty(); }

    // J acting on tangent vectors: (re, im) -> (-im, re) on each pair.
    Vec applyJ(const Vec& v) const {
        if (!has_complex()) fail(ErrorKind::input, "state space declares no complex pairs");
        Vec out = Vec::Zero(n);
        std::vector<bool> covered(n, false);
        for (auto [re, im] : complex_pairs) {
            out[re] = -v[im];
            out[im] = v[re];
            covered[re] = covered[im] = true;
        }
        for (int k = 0; k < n; ++k)
            if (!covered[k]) out[k] = v[k];
        return out;
    }

    // J as a matrix on the paired coordinates (identity elsewhere would not be
    // a complex structure; callers restrict to covered coordinates).
    Mat J_matrix() const {
        if (!has_complex()) fail(ErrorKind::input, "state space declares no complex pairs");
        Mat J = Mat::Zero(n, n);
        for (auto [re, im] : complex_pairs) {
            J(re, im) = -1.0;
            J(im, re) = 1.0;
        }
        return J;
    }
};

} // namespace lamina
