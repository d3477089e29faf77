#pragma once

#include <functional>

#include "lamina/state_space.hpp"

namespace lamina {

struct NewtonOptions {
    double tol = 1e-12;
    int max_iterations = 30;
    double max_step = 1e30; // per-iteration cap on |delta|
};

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0;
};

// Damped Newton for square systems. `system` fills R and J at q.
inline NewtonResult newton_solve(Vec& q,
                                 const std::function<void(const Vec&, Vec&, Mat&)>& system,
                                 const NewtonOptions& opt) {
    NewtonResult res;
    Vec R;
    Mat J;
    for (int it = 0; it < opt.max_iterations; ++it) {
        system(q, R, J);
        res.residual_norm = R.norm();
        res.iterations = it;
        if (!std::isfinite(res.residual_norm)) return res;
        if (res.residual_norm <= opt.tol) {
            res.converged = true;
            return res;
        }
        Vec delta = J.partialPivLu().solve(Vec(-R));
        if (!delta.allFinite()) return res;
        double dn = delta.norm();
        if (dn > opt.max_step) delta *= opt.max_step / dn;
        q += delta;
    }
    system(q, R, J);
    res.residual_norm = R.norm();
    res.iterations = opt.max_iterations;
    res.converged = res.residual_norm <= opt.tol;
    return res;
}

// Componentwise difference respecting ambient angle coordinates (minimal image).
inline Vec ambient_difference(const StateSpace& space, const Vec& a, const Vec& b) {
    Vec d = a - b;
    for (int k = 0; k < space.n; ++k)
        if (space.kinds[k] == Factor::angle) {
            while (d[k] > std::numbers::pi) d[k] -= kTwoPi;
            while (d[k] < -std::numbers::pi) d[k] += kTwoPi;
        }
    return d;
}

} // namespace lamina
