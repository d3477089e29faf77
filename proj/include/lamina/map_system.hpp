#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "lamina/state_space.hpp"

namespace lamina {

// An evaluable self-map of a flat-chart state space. `raw` must be smooth on
// the universal cover: it takes unwrapped coordinates and never wraps its
// angle outputs (finite differencing and Newton solves rely on that).
struct MapSystem {
    StateSpace space;
    std::function<Vec(const Vec&)> raw;
    std::function<Mat(const Vec&)> jac; // optional analytic Jacobian
    std::map<std::string, double> params;
    std::string name;
};

Vec eval_map(const MapSystem& sys, const Vec& x);
Mat jacobian(const MapSystem& sys, const Vec& x);

// Max over complex pairs of ||J Df - Df J|| (operator norm) at x. Zero for a
// holomorphic map.
double check_holomorphy(const MapSystem& sys, const Vec& x);

// Complex-analytic one-parameter family t -> f_t on a disk around 0.
struct DeformationFamily {
    std::function<MapSystem(std::complex<double>)> at;
    double disk_radius = 0.0;
};

} // namespace lamina
