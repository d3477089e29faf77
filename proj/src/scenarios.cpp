#include "lamina/scenarios.hpp"

#include <cmath>
#include <complex>

namespace lamina {

namespace {

using cplx = std::complex<double>;

cplx get_z(const Vec& v, int re, int im) { return {v[re], v[im]}; }

void put_z(Vec& v, int re, int im, cplx z) {
    v[re] = z.real();
    v[im] = z.imag();
}

// real 2x2 block of multiplication by a complex scalar
void put_block(Mat& J, int r, int c, cplx a) {
    J(r, c) = a.real();
    J(r, c + 1) = -a.imag();
    J(r + 1, c) = a.imag();
    J(r + 1, c + 1) = a.real();
}

double get_param(const Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

DiscreteLamination single_leaf(StateSpace space, std::vector<GridAxis> axes,
                               const std::function<Vec(const Vec&)>& embed,
                               const std::vector<Eigen::VectorXd>& offsets,
                               const std::string& name) {
    DiscreteLamination lam;
    lam.space = std::move(space);
    lam.axes = std::move(axes);
    lam.codes = {TransversalCode{}};
    lam.depth = 0;
    lam.metric_scale = Vec::Ones((int)lam.axes.size());
    lam.scenario = name;
    Eigen::MatrixXd v(lam.n(), lam.node_count());
    for (int f = 0; f < lam.node_count(); ++f) v.col(f) = embed(lam.node_params(f));
    lam.values = {std::move(v)};
    lam.default_monodromy();
    for (int k = 0; k < lam.d(); ++k)
        if (lam.axes[k].periodic && (int)offsets.size() > k && offsets[k].size())
            lam.set_monodromy(k, {0}, offsets[k]);
    lam.validate();
    return lam;
}

PullbackRule tree_pullback(const std::shared_ptr<DiscreteLamination>& lam,
                           const PreorbitScheme& scheme) {
    PullbackRule rule;
    rule.invertible = true;
    rule.forward = [lam, scheme](int c, const Vec& u) -> std::pair<int, Vec> {
        auto r = tree_forward(scheme, lam->codes[c], u);
        return {lam->code_index(r.code), r.u};
    };
    rule.inverse = [lam, scheme](int c, const Vec& u) -> std::optional<std::pair<int, Vec>> {
        auto r = tree_inverse(scheme, lam->codes[c], u);
        if (!r) return std::nullopt;
        return std::make_pair(lam->code_index(r->code), r->u);
    };
    return rule;
}

void check_nodes(int nodes) {
    if (nodes < 8) fail(ErrorKind::input, "grid resolution below 8 nodes per axis");
}

// ---- angle-doubling skew product on the cylinder S1 x R ---------------------

Scenario make_doubling_skew(Params p, int nodes) {
    check_nodes(nodes);
    const double b = get_param(p, "b", 0.1);
    const double normal_rate = get_param(p, "normal_rate", 10.0);

    Scenario sc;
    sc.name = "doubling_skew";
    sc.params = {{"b", b}, {"normal_rate", normal_rate}};
    sc.space.n = 2;
    sc.space.kinds = {Factor::angle, Factor::line};
    sc.variant = Variant::expanded;

    sc.base.space = sc.space;
    sc.base.name = "doubling_skew_base";
    sc.base.raw = [normal_rate](const Vec& x) { return Vec{{2 * x[0], normal_rate * x[1]}}; };
    sc.base.jac = [normal_rate](const Vec&) {
        Mat J(2, 2);
        J << 2, 0, 0, normal_rate;
        return J;
    };
    sc.perturbed = sc.base;
    sc.perturbed.name = "doubling_skew";
    sc.perturbed.params = sc.params;
    sc.perturbed.raw = [b, normal_rate](const Vec& x) {
        return Vec{{2 * x[0], normal_rate * x[1] + b * std::sin(x[0])}};
    };
    sc.perturbed.jac = [b, normal_rate](const Vec& x) {
        Mat J(2, 2);
        J << 2, 0, b * std::cos(x[0]), normal_rate;
        return J;
    };

    Eigen::VectorXd off(2);
    off << kTwoPi, 0;
    sc.lam = std::make_shared<DiscreteLamination>(single_leaf(
        sc.space, {GridAxis{true, 0, kTwoPi, nodes}},
        [](const Vec& u) { return Vec{{u[0], 0.0}}; }, {off}, sc.name));

    sc.pullback.forward = [](int c, const Vec& u) { return std::make_pair(c, Vec{{2 * u[0]}}); };
    sc.frame_hint = [](const TransversalCode&, const Vec&) { return Mat{{0.0}, {1.0}}; };
    sc.unstable_hint = *sc.frame_hint;
    sc.unstable_dim = 1;
    sc.eta = 0.5;
    return sc;
}

// ---- unit circle embedded in the plane, radially expanding doubling ---------

Scenario make_circle(Params p, int nodes) {
    check_nodes(nodes);
    const double eps = get_param(p, "eps", 0.05);

    Scenario sc;
    sc.name = "circle";
    sc.params = {{"eps", eps}};
    sc.space = StateSpace::lines(2);
    sc.variant = Variant::expanded;

    // polar (r, theta) -> (1 + 10(r-1) + eps cos(3 theta), 2 theta)
    auto radial_map = [](const Vec& x, double pert_eps) {
        double r2 = x[0] * x[0] + x[1] * x[1];
        double r = std::sqrt(r2);
        double cos3 = (x[0] * x[0] * x[0] - 3 * x[0] * x[1] * x[1]) / (r2 * r);
        double rr = 1 + 10 * (r - 1) + pert_eps * cos3;
        return Vec{{rr * (x[0] * x[0] - x[1] * x[1]) / r2, rr * 2 * x[0] * x[1] / r2}};
    };
    sc.base.space = sc.space;
    sc.base.name = "circle_base";
    sc.base.raw = [radial_map](const Vec& x) { return radial_map(x, 0.0); };
    sc.perturbed = sc.base;
    sc.perturbed.name = "circle";
    sc.perturbed.params = sc.params;
    sc.perturbed.raw = [radial_map, eps](const Vec& x) { return radial_map(x, eps); };

    sc.lam = std::make_shared<DiscreteLamination>(single_leaf(
        sc.space, {GridAxis{true, 0, kTwoPi, nodes}},
        [](const Vec& u) { return Vec{{std::cos(u[0]), std::sin(u[0])}}; }, {}, sc.name));

    sc.pullback.forward = [](int c, const Vec& u) { return std::make_pair(c, Vec{{2 * u[0]}}); };
    sc.frame_hint = [](const TransversalCode&, const Vec& u) {
        return Mat{{std::cos(u[0])}, {std::sin(u[0])}};
    };
    sc.unstable_hint = *sc.frame_hint;
    sc.unstable_dim = 1;
    sc.eta = 0.35;
    return sc;
}

// ---- solenoid attractor of the cylinder map ---------------------------------

Scenario make_solenoid(Params p, int nodes, int depth) {
    check_nodes(nodes);
    const double eps = get_param(p, "eps", 0.5);

    Scenario sc;
    sc.name = "solenoid";
    sc.params = {{"eps", eps}};
    sc.space.n = 2;
    sc.space.kinds = {Factor::line, Factor::angle};
    sc.variant = Variant::contracted;

    sc.base.space = sc.space;
    sc.base.name = "solenoid_base";
    sc.base.raw = [](const Vec& x) { return Vec{{x[0] / 2, 2 * x[1]}}; };
    sc.base.jac = [](const Vec&) {
        Mat J(2, 2);
        J << 0.5, 0, 0, 2;
        return J;
    };
    sc.perturbed = sc.base;
    sc.perturbed.name = "solenoid";
    sc.perturbed.params = sc.params;
    sc.perturbed.raw = [eps](const Vec& x) {
        return Vec{{x[0] / 2 + eps * std::sin(x[1]), 2 * x[1]}};
    };
    sc.perturbed.jac = [eps](const Vec& x) {
        Mat J(2, 2);
        J << 0.5, eps * std::cos(x[1]), 0, 2;
        return J;
    };

    PreorbitScheme scheme;
    scheme.axes = {GridAxis{true, 0, kTwoPi, nodes}};
    scheme.space = sc.space;
    scheme.base_map = [](const Vec& u) { return Vec{{wrap_angle(2 * u[0])}}; };
    scheme.branches = [](const Vec& u) {
        double half = wrap_angle(u[0]) / 2;
        return std::vector<Vec>{Vec{{half}}, Vec{{half + std::numbers::pi}}};
    };
    scheme.embed = [](const Vec& u) { return Vec{{0.0, u[0]}}; };
    scheme.branch_count = 2;
    scheme.depth = depth;
    sc.scheme = scheme;

    sc.lam = std::make_shared<DiscreteLamination>(build_preorbit_space(scheme));
    sc.lam->scenario = sc.name;
    sc.pullback = tree_pullback(sc.lam, scheme);
    sc.frame_hint = [](const TransversalCode&, const Vec&) { return Mat{{1.0}, {0.0}}; };
    sc.stable_hint = *sc.frame_hint;
    sc.stable_dim = 1;
    sc.eta = std::max(0.5, 2.5 * eps + 0.1);
    return sc;
}

// ---- rotation-doubling torus over its solenoid, hyperbolic normal bundle ----

Scenario make_torus(Params p, int nodes, int depth) {
    check_nodes(nodes);
    const double alpha = get_param(p, "alpha", 1.0);
    const double ex = get_param(p, "ex", 0.01);
    const double ey = get_param(p, "ey", 0.05);
    const int phi_nodes = std::max(16, nodes / 8);

    Scenario sc;
    sc.name = "torus";
    sc.params = {{"alpha", alpha}, {"ex", ex}, {"ey", ey}};
    sc.space.n = 4;
    sc.space.kinds = {Factor::angle, Factor::angle, Factor::line, Factor::line};
    sc.variant = Variant::hyperbolic;

    sc.base.space = sc.space;
    sc.base.name = "torus_base";
    sc.base.raw = [alpha](const Vec& x) {
        return Vec{{2 * x[0], x[1] + alpha, 0.0, 10 * x[3]}};
    };
    sc.base.jac = [](const Vec&) {
        Mat J = Mat::Zero(4, 4);
        J(0, 0) = 2;
        J(1, 1) = 1;
        J(3, 3) = 10;
        return J;
    };
    sc.perturbed = sc.base;
    sc.perturbed.name = "torus";
    sc.perturbed.params = sc.params;
    sc.perturbed.raw = [alpha, ex, ey](const Vec& x) {
        return Vec{{2 * x[0], x[1] + alpha, ex * std::sin(x[0]), 10 * x[3] + ey * std::cos(x[0])}};
    };
    sc.perturbed.jac = [ex, ey](const Vec& x) {
        Mat J = Mat::Zero(4, 4);
        J(0, 0) = 2;
        J(1, 1) = 1;
        J(2, 0) = ex * std::cos(x[0]);
        J(3, 0) = -ey * std::sin(x[0]);
        J(3, 3) = 10;
        return J;
    };

    PreorbitScheme scheme;
    scheme.axes = {GridAxis{true, 0, kTwoPi, nodes}, GridAxis{true, 0, kTwoPi, phi_nodes}};
    scheme.space = sc.space;
    scheme.base_map = [alpha](const Vec& u) {
        return Vec{{wrap_angle(2 * u[0]), wrap_angle(u[1] + alpha)}};
    };
    scheme.branches = [alpha](const Vec& u) {
        double half = wrap_angle(u[0]) / 2;
        double phi = wrap_angle(u[1] - alpha);
        return std::vector<Vec>{Vec{{half, phi}}, Vec{{half + std::numbers::pi, phi}}};
    };
    scheme.embed = [](const Vec& u) { return Vec{{u[0], u[1], 0.0, 0.0}}; };
    scheme.branch_count = 2;
    scheme.depth = depth;
    sc.scheme = scheme;

    sc.lam = std::make_shared<DiscreteLamination>(build_preorbit_space(scheme));
    sc.lam->scenario = sc.name;
    sc.pullback = tree_pullback(sc.lam, scheme);
    sc.frame_hint = [](const TransversalCode&, const Vec&) {
        Mat F = Mat::Zero(4, 2);
        F(2, 0) = 1;
        F(3, 1) = 1;
        return F;
    };
    sc.stable_hint = [](const TransversalCode&, const Vec&) {
        Mat E = Mat::Zero(4, 1);
        E(2, 0) = 1;
        return E;
    };
    sc.unstable_hint = [](const TransversalCode&, const Vec&) {
        Mat E = Mat::Zero(4, 1);
        E(3, 0) = 1;
        return E;
    };
    sc.stable_dim = sc.unstable_dim = 1;

    HyperbolicData hd;
    hd.stable_basis = Mat::Zero(4, 1);
    hd.stable_basis(2, 0) = 1;
    hd.unstable_basis = Mat::Zero(4, 1);
    hd.unstable_basis(3, 0) = 1;
    hd.stable_thick_fwd = [](double) { return 0.0; };
    hd.unstable_thick_fwd = [](double b) { return 10 * b; };
    hd.unstable_thick_inv = [](double b) { return b / 10; };
    sc.hyper = hd;
    sc.eta = 0.5;
    return sc;
}

// ---- plane of bounded orbits of z(z+1), normally expanded fiber -------------

Scenario make_quadratic_plane(Params p, int nodes) {
    check_nodes(nodes);
    const double eps = get_param(p, "eps", 0.05);
    const double eps_base = get_param(p, "eps_base", 0.0);

    Scenario sc;
    sc.name = "quadratic_plane";
    sc.params = {{"eps", eps}, {"eps_base", eps_base}};
    sc.space = StateSpace::lines(4);
    sc.space.complex_pairs = {{0, 1}, {2, 3}};
    sc.variant = Variant::expanded;

    sc.base.space = sc.space;
    sc.base.name = "quadratic_plane_base";
    sc.base.raw = [](const Vec& x) {
        cplx z = get_z(x, 0, 1), w = get_z(x, 2, 3);
        Vec y(4);
        put_z(y, 0, 1, z * (z + 1.0));
        put_z(y, 2, 3, 4.0 * w);
        return y;
    };
    sc.base.jac = [](const Vec& x) {
        cplx z = get_z(x, 0, 1);
        Mat J = Mat::Zero(4, 4);
        put_block(J, 0, 0, 2.0 * z + 1.0);
        put_block(J, 2, 2, 4.0);
        return J;
    };
    sc.perturbed = sc.base;
    sc.perturbed.name = "quadratic_plane";
    sc.perturbed.params = sc.params;
    // eps perturbs the fiber forcing, eps_base the plane dynamics themselves
    sc.perturbed.raw = [eps, eps_base](const Vec& x) {
        cplx z = get_z(x, 0, 1), w = get_z(x, 2, 3);
        cplx q = 0.25 * (z + 0.3);
        Vec y(4);
        put_z(y, 0, 1, z * (z + 1.0) + eps_base * q);
        put_z(y, 2, 3, 4.0 * w + eps * q);
        return y;
    };
    sc.perturbed.jac = [eps, eps_base](const Vec& x) {
        cplx z = get_z(x, 0, 1);
        Mat J = Mat::Zero(4, 4);
        put_block(J, 0, 0, 2.0 * z + 1.0 + 0.25 * eps_base);
        put_block(J, 2, 0, 0.25 * eps);
        put_block(J, 2, 2, 4.0);
        return J;
    };

    const int ny = 2 * nodes;
    sc.lam = std::make_shared<DiscreteLamination>(single_leaf(
        sc.space,
        {GridAxis{false, -2.5, 4.5, nodes}, GridAxis{false, -4.5, 9.0, ny}},
        [](const Vec& u) { return Vec{{u[0], u[1], 0.0, 0.0}}; }, {}, sc.name));
    sc.lam->marked.everything = false;
    sc.lam->marked.center = Vec{{-0.5, 0.0}};
    sc.lam->marked.inner_hw = Vec{{1.3, 1.3}};
    sc.lam->marked.outer_hw = Vec{{1.45, 1.45}};

    sc.pullback.forward = [](int c, const Vec& u) {
        cplx z(u[0], u[1]);
        cplx pz = z * (z + 1.0);
        return std::make_pair(c, Vec{{pz.real(), pz.imag()}});
    };
    sc.frame_hint = [](const TransversalCode&, const Vec&) {
        Mat F = Mat::Zero(4, 2);
        F(2, 0) = 1;
        F(3, 1) = 1;
        return F;
    };
    sc.unstable_hint = *sc.frame_hint;
    sc.unstable_dim = 2;
    sc.leaf_complex_axes = {{0, 1}};
    sc.fiber_complex_pairs = {{0, 1}};
    sc.eta = 0.5;
    return sc;
}

// ---- preorbit annulus of z^2 + c with small second coordinate ---------------

Scenario make_henon(Params p, int nodes, int depth) {
    check_nodes(nodes);
    const double c_re = get_param(p, "c_re", -0.1);
    const double c_im = get_param(p, "c_im", 0.0);
    const double b_re = get_param(p, "b_re", 0.01);
    const double b_im = get_param(p, "b_im", 0.0);
    const cplx c(c_re, c_im), b(b_re, b_im);

    Scenario sc;
    sc.name = "henon";
    sc.params = {{"c_re", c_re}, {"c_im", c_im}, {"b_re", b_re}, {"b_im", b_im}};
    sc.space = StateSpace::lines(4);
    sc.space.complex_pairs = {{0, 1}, {2, 3}};
    sc.variant = Variant::contracted;

    auto henon_map = [c](cplx b_val, const Vec& x) {
        cplx z = get_z(x, 0, 1), w = get_z(x, 2, 3);
        Vec y(4);
        put_z(y, 0, 1, z * z + c + w);
        put_z(y, 2, 3, b_val * z);
        return y;
    };
    auto henon_jac = [](cplx b_val, const Vec& x) {
        cplx z = get_z(x, 0, 1);
        Mat J = Mat::Zero(4, 4);
        put_block(J, 0, 0, 2.0 * z);
        put_block(J, 0, 2, 1.0);
        put_block(J, 2, 0, b_val);
        return J;
    };

    sc.base.space = sc.space;
    sc.base.name = "henon_base";
    sc.base.raw = [henon_map](const Vec& x) { return henon_map(0.0, x); };
    sc.base.jac = [henon_jac](const Vec& x) { return henon_jac(0.0, x); };
    sc.perturbed = sc.base;
    sc.perturbed.name = "henon";
    sc.perturbed.params = sc.params;
    sc.perturbed.raw = [henon_map, b](const Vec& x) { return henon_map(b, x); };
    sc.perturbed.jac = [henon_jac, b](const Vec& x) { return henon_jac(b, x); };

    StateSpace space_copy = sc.space;
    DeformationFamily fam;
    fam.disk_radius = 0.02;
    fam.at = [henon_map, henon_jac, space_copy](cplx t) {
        MapSystem m;
        m.space = space_copy;
        m.name = "henon_t";
        m.raw = [henon_map, t](const Vec& x) { return henon_map(t, x); };
        m.jac = [henon_jac, t](const Vec& x) { return henon_jac(t, x); };
        return m;
    };
    sc.family = fam;

    const int rho_nodes = std::max(12, nodes / 6);
    PreorbitScheme scheme;
    scheme.axes = {GridAxis{false, std::log(0.45), std::log(1.55) - std::log(0.45), rho_nodes},
                   GridAxis{true, 0, kTwoPi, nodes}};
    scheme.space = sc.space;
    auto to_chart = [](cplx z) {
        return Vec{{std::log(std::abs(z)), wrap_angle(std::arg(z))}};
    };
    auto from_chart = [](const Vec& u) { return std::exp(cplx(u[0], 0) + cplx(0, u[1])); };
    scheme.base_map = [c, to_chart, from_chart](const Vec& u) {
        cplx z = from_chart(u);
        return to_chart(z * z + c);
    };
    scheme.branches = [c, to_chart, from_chart](const Vec& u) {
        cplx s = std::sqrt(from_chart(u) - c);
        return std::vector<Vec>{to_chart(s), to_chart(-s)};
    };
    scheme.embed = [from_chart](const Vec& u) {
        cplx z = from_chart(u);
        return Vec{{z.real(), z.imag(), 0.0, 0.0}};
    };
    scheme.branch_count = 2;
    scheme.depth = depth;
    sc.scheme = scheme;

    sc.lam = std::make_shared<DiscreteLamination>(build_preorbit_space(scheme));
    sc.lam->scenario = sc.name;
    sc.pullback = tree_pullback(sc.lam, scheme);
    sc.frame_hint = [](const TransversalCode&, const Vec&) {
        Mat F = Mat::Zero(4, 2);
        F(2, 0) = 1;
        F(3, 1) = 1;
        return F;
    };
    sc.stable_hint = [from_chart](const TransversalCode&, const Vec& u) {
        cplx z = from_chart(u);
        Mat E(4, 2); // complex span of (1, -2z): tangent to {w = -(z^2+c)}
        E << 1, 0, 0, 1, -2 * z.real(), 2 * z.imag(), -2 * z.imag(), -2 * z.real();
        return E;
    };
    sc.stable_dim = 2;
    sc.leaf_complex_axes = {{0, 1}};
    sc.fiber_complex_pairs = {{0, 1}};
    sc.eta = 0.3;
    return sc;
}

} // namespace

std::vector<std::string> scenario_names() {
    return {"doubling_skew", "circle", "solenoid", "torus", "quadratic_plane", "henon"};
}

Scenario build_scenario(const std::string& name, Params params, int nodes, int depth) {
    if (name == "doubling_skew") return make_doubling_skew(std::move(params), nodes);
    if (name == "circle") return make_circle(std::move(params), nodes);
    if (name == "solenoid") return make_solenoid(std::move(params), nodes, depth);
    if (name == "torus") return make_torus(std::move(params), nodes, depth);
    if (name == "quadratic_plane") return make_quadratic_plane(std::move(params), nodes);
    if (name == "henon") return make_henon(std::move(params), nodes, depth);
    fail(ErrorKind::input, "unknown scenario '" + name + "'");
}

std::function<double(int, const Vec&, int, const Vec&)> scenario_code_metric(const Scenario& sc) {
    if (!sc.scheme) return nullptr;
    auto lam = sc.lam;
    PreorbitScheme scheme = *sc.scheme;
    return [lam, scheme](int ca, const Vec& ua, int cb, const Vec& ub) {
        return preorbit_distance(scheme, lam->codes[ca], ua, lam->codes[cb], ub);
    };
}

std::function<std::pair<int, Vec>(int, const Vec&, int)> scenario_backward_walker(
    const Scenario& sc) {
    if (!sc.scheme || !sc.pullback.invertible) return nullptr;
    auto lam = sc.lam;
    PreorbitScheme scheme = *sc.scheme;
    return [lam, scheme](int c, const Vec& u, int pad) {
        auto r = shift_inverse(scheme, lam->codes[c], u, pad);
        return std::make_pair(lam->code_index(r.code), r.u);
    };
}

Params unperturbed_params(const std::string& name) {
    if (name == "doubling_skew") return {{"b", 0.0}};
    if (name == "circle") return {{"eps", 0.0}};
    if (name == "solenoid") return {{"eps", 0.0}};
    if (name == "torus") return {{"ex", 0.0}, {"ey", 0.0}};
    if (name == "quadratic_plane") return {{"eps", 0.0}};
    if (name == "henon") return {{"b_re", 0.0}, {"b_im", 0.0}};
    fail(ErrorKind::input, "unknown scenario '" + name + "'");
}

} // namespace lamina
