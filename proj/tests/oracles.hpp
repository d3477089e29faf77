#pragma once

// Closed-form oracles used to freeze expected values. These evaluate the
// invariance equations directly and stay independent of the transform path
// they check.

#include <cmath>
#include <vector>

#include "lamina/state_space.hpp"

namespace oracles {

// skew product (2t, R y + b sin t): invariant graph
// y(t) = -b * sum_{k>=0} R^-(k+1) sin(2^k t)
inline double doubling_skew_series(double theta, double b = 0.1, double rate = 10.0,
                                   int terms = 13) {
    double s = 0, scale = 1.0 / rate, freq = 1;
    for (int k = 0; k < terms; ++k) {
        s += scale * std::sin(freq * theta);
        scale /= rate;
        freq *= 2;
    }
    return -b * s;
}

// radial doubling with radius forcing eps cos(3t): v(t) = -eps sum 10^-(k+1) cos(3 2^k t)
inline double circle_series(double theta, double eps, int terms = 13) {
    double s = 0, scale = 0.1, freq = 3;
    for (int k = 0; k < terms; ++k) {
        s += scale * std::cos(freq * theta);
        scale /= 10;
        freq *= 2;
    }
    return -eps * s;
}

// preimage angles of angle doubling selected by a branch word
inline std::vector<double> solenoid_preimage_angles(const std::vector<int>& word, double theta) {
    std::vector<double> out;
    double cur = lamina::wrap_angle(theta);
    for (int b : word) {
        cur = cur / 2 + b * std::numbers::pi;
        out.push_back(cur);
    }
    return out;
}

// cylinder map (x/2 + eps sin t, 2t): truncated invariant section
// v = eps * sum_{n=1}^{D} 2^-(n-1) sin(theta_n)
inline double solenoid_series(const std::vector<int>& word, double theta, double eps = 0.5) {
    auto angles = solenoid_preimage_angles(word, theta);
    double s = 0, scale = 1.0;
    for (double a : angles) {
        s += scale * std::sin(a);
        scale /= 2;
    }
    return eps * s;
}

// y-component of the perturbed torus object: Y(t) = -ey sum_{k>=1} 10^-k cos(2^(k-1) t)
inline double torus_y_series(double theta, double ey, int terms = 13) {
    double s = 0, scale = 0.1, freq = 1;
    for (int k = 1; k <= terms; ++k) {
        s += scale * std::cos(freq * theta);
        scale /= 10;
        freq *= 2;
    }
    return -ey * s;
}

// x-component: one-term series through the first preimage angle
inline double torus_x_series(const std::vector<int>& word, double theta, double ex) {
    if (word.empty()) return 0.0;
    auto angles = solenoid_preimage_angles(word, theta);
    return ex * std::sin(angles[0]);
}

} // namespace oracles
