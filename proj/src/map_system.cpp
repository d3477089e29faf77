#include "lamina/map_system.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lamina {

namespace {

std::string point_string(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ")";
    return os.str();
}

} // namespace

Vec eval_map(const MapSystem& sys, const Vec& x) {
    if ((int)x.size() != sys.space.n)
        fail(ErrorKind::input, "eval_map: point dimension " + std::to_string(x.size()) +
                                   " != ambient " + std::to_string(sys.space.n));
    Vec y = sys.raw(x);
    if (!y.allFinite())
        fail(ErrorKind::numeric, "eval_map: non-finite output at " + point_string(x));
    return sys.space.wrap(y);
}

Mat jacobian(const MapSystem& sys, const Vec& x) {
    if ((int)x.size() != sys.space.n)
        fail(ErrorKind::input, "jacobian: point dimension mismatch");
    Mat J(sys.space.n, sys.space.n);
    if (sys.jac) {
        J = sys.jac(x);
    } else {
        // Central differences with the fixed step rule h = cbrt(eps)*max(1,|x_k|).
        const double base = std::cbrt(std::numeric_limits<double>::epsilon());
        Vec xp = x, xm = x;
        for (int k = 0; k < sys.space.n; ++k) {
            double h = base * std::max(1.0, std::fabs(x[k]));
            xp[k] = x[k] + h;
            xm[k] = x[k] - h;
            J.col(k) = (sys.raw(xp) - sys.raw(xm)) / (2 * h);
            xp[k] = x[k];
            xm[k] = x[k];
        }
    }
    if (!J.allFinite())
        fail(ErrorKind::numeric, "jacobian: non-finite entries at " + point_string(x));
    return J;
}

double check_holomorphy(const MapSystem& sys, const Vec& x) {
    const auto& pairs = sys.space.complex_pairs;
    if (pairs.empty()) fail(ErrorKind::input, "check_holomorphy: no complex pairs declared");
    Mat Df = jacobian(sys, x);
    Mat J = sys.space.J_matrix();
    // Restrict the commutator to the paired coordinates (J vanishes elsewhere).
    Mat C = J * Df - Df * J;
    std::vector<int> idx;
    for (auto [re, im] : pairs) {
        idx.push_back(re);
        idx.push_back(im);
    }
    Mat R((int)idx.size(), (int)idx.size());
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = 0; b < idx.size(); ++b) R(a, b) = C(idx[a], idx[b]);
    Eigen::JacobiSVD<Mat> svd(R);
    return svd.singularValues()(0);
}

} // namespace lamina
