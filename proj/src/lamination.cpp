#include "lamina/lamination.hpp"

#include <algorithm>
#include <cmath>

namespace lamina {

double smoothstep_quintic(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6 * t - 15) + 10);
}

static double smoothstep_quintic_deriv(double t) {
    if (t <= 0 || t >= 1) return 0;
    return 30 * t * t * (t - 1) * (t - 1);
}

int DiscreteLamination::node_count() const {
    int m = 1;
    for (const auto& a : axes) m *= a.count;
    return m;
}

std::vector<int> DiscreteLamination::primary_codes() const {
    std::vector<int> out;
    for (int c = 0; c < code_count(); ++c)
        if (codes[c].depth() == depth) out.push_back(c);
    return out;
}

void DiscreteLamination::build_index() const {
    if (!index_.empty() || codes.empty()) return;
    for (int c = 0; c < code_count(); ++c) index_[codes[c].symbols] = c;
}

int DiscreteLamination::code_index(const TransversalCode& c) const {
    build_index();
    auto it = index_.find(c.symbols);
    if (it == index_.end()) fail(ErrorKind::input, "unknown transversal code " + c.label());
    return it->second;
}

bool DiscreteLamination::has_code(const TransversalCode& c) const {
    build_index();
    return index_.count(c.symbols) > 0;
}

int DiscreteLamination::flat_index(const std::vector<int>& j) const {
    int flat = 0;
    for (int k = d() - 1; k >= 0; --k) flat = flat * axes[k].count + j[k];
    return flat;
}

std::vector<int> DiscreteLamination::multi_index(int flat) const {
    std::vector<int> j(d());
    for (int k = 0; k < d(); ++k) {
        j[k] = flat % axes[k].count;
        flat /= axes[k].count;
    }
    return j;
}

Vec DiscreteLamination::node_params(int flat) const {
    auto j = multi_index(flat);
    Vec u(d());
    for (int k = 0; k < d(); ++k) u[k] = axes[k].coord(j[k]);
    return u;
}

void DiscreteLamination::default_monodromy() {
    monodromy.assign(axes.size(), std::nullopt);
    for (int k = 0; k < d(); ++k) {
        if (!axes[k].periodic) continue;
        AxisMonodromy m;
        m.succ.resize(code_count());
        m.pred.resize(code_count());
        for (int c = 0; c < code_count(); ++c) m.succ[c] = m.pred[c] = c;
        m.ambient_offset = Eigen::VectorXd::Zero(n());
        monodromy[k] = std::move(m);
    }
}

void DiscreteLamination::set_monodromy(int axis, std::vector<int> succ,
                                       Eigen::VectorXd ambient_offset) {
    if (!axes[axis].periodic) fail(ErrorKind::input, "monodromy on a line axis");
    AxisMonodromy m;
    m.succ = std::move(succ);
    m.pred.assign(code_count(), -1);
    for (int c = 0; c < code_count(); ++c) m.pred[m.succ[c]] = c;
    for (int c = 0; c < code_count(); ++c)
        if (m.pred[c] < 0) fail(ErrorKind::input, "monodromy successor map is not a permutation");
    m.ambient_offset = std::move(ambient_offset);
    monodromy[axis] = std::move(m);
}

double DiscreteLamination::bump(const Vec& u) const {
    if (marked.everything) return 1.0;
    double t = 1.0;
    for (int k = 0; k < d(); ++k) {
        if (!std::isfinite(marked.outer_hw[k])) continue;
        double dd = axes[k].periodic ? angle_distance(u[k], marked.center[k])
                                     : std::fabs(u[k] - marked.center[k]);
        double tk;
        if (dd <= marked.inner_hw[k]) tk = 1.0;
        else if (dd >= marked.outer_hw[k]) tk = 0.0;
        else tk = (marked.outer_hw[k] - dd) / (marked.outer_hw[k] - marked.inner_hw[k]);
        t = std::min(t, tk);
    }
    return smoothstep_quintic(t);
}

Vec DiscreteLamination::bump_gradient(const Vec& u) const {
    Vec g = Vec::Zero(d());
    if (marked.everything) return g;
    // active axis = the one attaining the min in bump()
    double t = 1.0;
    int active = -1;
    double slope = 0;
    for (int k = 0; k < d(); ++k) {
        if (!std::isfinite(marked.outer_hw[k])) continue;
        double delta = axes[k].periodic ? angle_distance(u[k], marked.center[k])
                                        : std::fabs(u[k] - marked.center[k]);
        double tk, sk = 0;
        if (delta <= marked.inner_hw[k]) tk = 1.0;
        else if (delta >= marked.outer_hw[k]) tk = 0.0;
        else {
            tk = (marked.outer_hw[k] - delta) / (marked.outer_hw[k] - marked.inner_hw[k]);
            double sign = (u[k] >= marked.center[k]) ? 1.0 : -1.0;
            sk = -sign / (marked.outer_hw[k] - marked.inner_hw[k]);
        }
        if (tk < t) {
            t = tk;
            active = k;
            slope = sk;
        }
    }
    if (active >= 0) g[active] = smoothstep_quintic_deriv(t) * slope;
    return g;
}

void DiscreteLamination::validate() const {
    space.validate();
    if (axes.empty()) fail(ErrorKind::input, "lamination needs at least one leaf axis");
    for (const auto& a : axes) {
        if (a.count < 4) fail(ErrorKind::input, "axis needs at least 4 nodes");
        if (a.width <= 0) fail(ErrorKind::input, "axis width must be positive");
    }
    if ((int)values.size() != code_count())
        fail(ErrorKind::input, "one grid per code required");
    std::vector<std::vector<int>> seen;
    for (const auto& c : codes) seen.push_back(c.symbols);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        fail(ErrorKind::input, "duplicate transversal codes");
    for (const auto& v : values) {
        if (v.rows() != n() || v.cols() != node_count())
            fail(ErrorKind::input, "grid value matrix has wrong shape");
        if (!v.allFinite()) fail(ErrorKind::numeric, "non-finite stored immersion values");
    }
    if ((int)metric_scale.size() != d()) fail(ErrorKind::input, "metric_scale size mismatch");
    build_index(); // eager, so later concurrent lookups are read-only
}

// ---- NodeField --------------------------------------------------------------

NodeField::NodeField(const DiscreteLamination* lam, int channels, bool ambient_offsets)
    : lam_(lam), channels_(channels), ambient_offsets_(ambient_offsets) {
    data_.resize(lam->code_count());
    for (auto& m : data_) m.setZero(channels, lam->node_count());
}

void NodeField::fill_zero() {
    for (auto& m : data_) m.setZero();
}

void NodeField::plan(int axis, double u, AxisPlan& p) const {
    const GridAxis& a = lam_->axes[axis];
    const double h = a.spacing();
    double t = (u - a.lo) / h;
    int cell = (int)std::floor(t);
    int base = cell - 1;
    if (!a.periodic) base = std::clamp(base, 0, a.count - 4);
    double s = t - base;
    // cubic Lagrange on stencil offsets 0..3
    const double s1 = s - 1, s2 = s - 2, s3 = s - 3;
    p.base = base;
    p.w[0] = -s1 * s2 * s3 / 6.0;
    p.w[1] = s * s2 * s3 / 2.0;
    p.w[2] = -s * s1 * s3 / 2.0;
    p.w[3] = s * s1 * s2 / 6.0;
    p.dw[0] = -(s2 * s3 + s1 * s3 + s1 * s2) / 6.0 / h;
    p.dw[1] = (s2 * s3 + s * s3 + s * s2) / 2.0 / h;
    p.dw[2] = -(s1 * s3 + s * s3 + s * s1) / 2.0 / h;
    p.dw[3] = (s1 * s2 + s * s2 + s * s1) / 6.0 / h;
}

namespace {

struct Tap {
    int node;    // wrapped node index
    int winding; // -1, 0, +1 seam crossings
};

} // namespace

void NodeField::eval_jet(int code, Vec u, Vec& value, Eigen::MatrixXd& deriv) const {
    const DiscreteLamination& L = *lam_;
    const int d = L.d();

    // normalize periodic coordinates into [lo, lo+width), switching codes and
    // accumulating ambient winding offsets
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(channels_);
    for (int k = 0; k < d; ++k) {
        const GridAxis& a = L.axes[k];
        if (a.periodic) {
            const auto& mono = L.monodromy[k];
            while (u[k] >= a.hi()) {
                u[k] -= a.width;
                if (mono) {
                    code = mono->succ[code];
                    if (ambient_offsets_) offset += mono->ambient_offset;
                }
            }
            while (u[k] < a.lo) {
                u[k] += a.width;
                if (mono) {
                    code = mono->pred[code];
                    if (ambient_offsets_) offset -= mono->ambient_offset;
                }
            }
        } else {
            const double slack = 0.5 * a.spacing();
            if (u[k] < a.lo - slack || u[k] > a.hi() + slack)
                fail(ErrorKind::domain,
                     "leaf parameter " + std::to_string(u[k]) + " outside axis domain [" +
                         std::to_string(a.lo) + ", " + std::to_string(a.hi()) + "]");
        }
    }

    AxisPlan plans[3];
    Tap taps[3][4];
    for (int k = 0; k < d; ++k) {
        plan(k, u[k], plans[k]);
        const GridAxis& a = L.axes[k];
        for (int i = 0; i < 4; ++i) {
            int j = plans[k].base + i;
            int w = 0;
            if (a.periodic) {
                while (j < 0) { j += a.count; --w; }
                while (j >= a.count) { j -= a.count; ++w; }
            }
            taps[k][i] = {j, w};
        }
    }

    value = Vec::Zero(channels_);
    deriv.setZero(channels_, d);

    int extents[3] = {1, 1, 1};
    for (int k = 0; k < d; ++k) extents[k] = 4;
    const int strides[3] = {
        1,
        d > 1 ? L.axes[0].count : 0,
        d > 2 ? L.axes[0].count * L.axes[1].count : 0,
    };

    for (int i2 = 0; i2 < extents[2]; ++i2)
        for (int i1 = 0; i1 < extents[1]; ++i1)
            for (int i0 = 0; i0 < extents[0]; ++i0) {
                const int is[3] = {i0, i1, i2};
                int c = code;
                int flat = 0;
                double wind_off[3] = {0, 0, 0};
                for (int k = 0; k < d; ++k) {
                    const Tap& t = taps[k][is[k]];
                    flat += strides[k] * t.node;
                    if (t.winding != 0) {
                        const auto& mono = L.monodromy[k];
                        if (mono) {
                            c = t.winding > 0 ? mono->succ[c] : mono->pred[c];
                            wind_off[k] = t.winding;
                        }
                    }
                }
                double wv = 1.0;
                for (int k = 0; k < d; ++k) wv *= plans[k].w[is[k]];

                Vec sample = data_[c].col(flat);
                if (ambient_offsets_) {
                    for (int k = 0; k < d; ++k)
                        if (wind_off[k] != 0 && L.monodromy[k])
                            sample += wind_off[k] * L.monodromy[k]->ambient_offset;
                }
                value += wv * sample;
                for (int k = 0; k < d; ++k) {
                    double wd = 1.0;
                    for (int l = 0; l < d; ++l)
                        wd *= (l == k) ? plans[l].dw[is[l]] : plans[l].w[is[l]];
                    deriv.col(k) += wd * sample;
                }
            }
    value += offset;
}

Vec NodeField::eval(int code, Vec u) const {
    Vec v;
    Eigen::MatrixXd dv;
    eval_jet(code, std::move(u), v, dv);
    return v;
}

double NodeField::sup_distance(const NodeField& other) const {
    double s = 0;
    for (size_t c = 0; c < data_.size(); ++c)
        s = std::max(s, (data_[c] - other.data_[c]).cwiseAbs().maxCoeff());
    return s;
}

double NodeField::sup_norm() const {
    double s = 0;
    for (const auto& m : data_)
        if (m.size()) s = std::max(s, m.cwiseAbs().maxCoeff());
    return s;
}

// ---- operations -------------------------------------------------------------

NodeField immersion_field(const DiscreteLamination& lam) {
    NodeField f(&lam, lam.n(), true);
    for (int c = 0; c < lam.code_count(); ++c) f.data(c) = lam.values[c];
    return f;
}

Vec evaluate_immersion(const DiscreteLamination& lam, const NodeField& values, int code,
                       const Vec& u) {
    return lam.space.wrap(values.eval(code, u));
}

double leaf_distance(const DiscreteLamination& lam, const NodeField& values, int code,
                     const Vec& u1, const Vec& u2, int min_samples) {
    Vec delta = u2 - u1;
    // minimal parameter path on periodic axes (angle identification)
    for (int k = 0; k < lam.d(); ++k)
        if (lam.axes[k].periodic) {
            double w = lam.axes[k].width;
            delta[k] = std::remainder(delta[k], w);
        }
    double param_len = 0;
    for (int k = 0; k < lam.d(); ++k)
        param_len = std::max(param_len, std::fabs(delta[k]) / lam.axes[k].spacing());
    int samples = std::max(min_samples, std::min(8192, (int)std::ceil(2 * param_len)));

    double len = 0;
    Vec val;
    Eigen::MatrixXd deriv;
    for (int s = 0; s < samples; ++s) {
        double tm = (s + 0.5) / samples;
        Vec um = u1 + tm * delta;
        values.eval_jet(code, um, val, deriv);
        // pullback metric with per-axis weights
        double q = 0;
        for (int k = 0; k < lam.d(); ++k)
            for (int l = 0; l < lam.d(); ++l)
                q += lam.metric_scale[k] * lam.metric_scale[l] * delta[k] * delta[l] *
                     deriv.col(k).dot(deriv.col(l));
        len += std::sqrt(std::max(q, 0.0)) / samples;
    }
    return len;
}

ParameterBox plaque_neighborhood(const DiscreteLamination& lam, const NodeField& values,
                                 int code, const Vec& u, double eps) {
    if (eps <= 0) fail(ErrorKind::input, "plaque_neighborhood: eps must be positive");
    ParameterBox box;
    box.center = u;
    box.half_width = Vec::Zero(lam.d());
    // per-axis diameter budget so the box diameter stays below eps
    const double budget = eps / std::sqrt((double)lam.d());
    for (int k = 0; k < lam.d(); ++k) {
        const GridAxis& a = lam.axes[k];
        double rmax = a.periodic ? a.width / 2
                                 : std::min(u[k] - a.lo, a.hi() - u[k]);
        auto diam = [&](double r) {
            // measured through the center so periodic wrapping cannot shortcut
            Vec lo_pt = u, hi_pt = u;
            lo_pt[k] = u[k] - r;
            hi_pt[k] = u[k] + r;
            return leaf_distance(lam, values, code, lo_pt, u) +
                   leaf_distance(lam, values, code, u, hi_pt);
        };
        if (diam(rmax) <= budget) {
            box.half_width[k] = rmax; // saturated: whole axis domain
            continue;
        }
        double lo = 0, hi = rmax;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (diam(mid) <= budget ? lo : hi) = mid;
        }
        box.half_width[k] = lo;
    }
    return box;
}

} // namespace lamina
