#include "lamina/inverse_limit.hpp"

#include <algorithm>
#include <cmath>

namespace lamina {

double chart_distance(const std::vector<GridAxis>& axes, const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t k = 0; k < axes.size(); ++k) {
        double d = axes[k].periodic ? angle_distance(a[k], b[k]) : a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<Vec> preorbit_chain(const PreorbitScheme& s, const TransversalCode& code,
                                const Vec& u) {
    std::vector<Vec> chain;
    chain.reserve(code.depth() + 1);
    chain.push_back(u);
    for (int m = 0; m < code.depth(); ++m) {
        auto pre = s.branches(chain.back());
        int b = code.symbols[m];
        if (b < 0 || b >= (int)pre.size())
            fail(ErrorKind::input, "branch symbol " + std::to_string(b) + " out of range");
        chain.push_back(pre[b]);
    }
    return chain;
}

int match_branch(const PreorbitScheme& s, const Vec& target, const Vec& known_preimage) {
    auto pre = s.branches(target);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < (int)pre.size(); ++b) {
        double d = chart_distance(s.axes, pre[b], known_preimage);
        if (d < best_d) {
            best_d = d;
            best = b;
        }
    }
    if (best_d > 1e-6)
        fail(ErrorKind::scheme, "no branch of the base map matches the known preimage");
    return best;
}

double preorbit_distance(const PreorbitScheme& s, const TransversalCode& c1, const Vec& u1,
                         const TransversalCode& c2, const Vec& u2) {
    auto p = preorbit_chain(s, c1, u1);
    auto q = preorbit_chain(s, c2, u2);
    size_t m = std::min(p.size(), q.size());
    double sum = 0, pow2 = 1;
    for (size_t n = 0; n < m; ++n) {
        sum += std::min(chart_distance(s.axes, p[n], q[n]), 1.0) / pow2;
        pow2 *= 2;
    }
    return sum;
}

namespace {

// all words over {0..branch_count-1} of length <= depth, depth-major
std::vector<TransversalCode> code_tree(int branch_count, int depth) {
    std::vector<TransversalCode> out;
    std::vector<TransversalCode> level{TransversalCode{}};
    out.push_back(level[0]);
    for (int k = 1; k <= depth; ++k) {
        std::vector<TransversalCode> next;
        for (const auto& w : level)
            for (int b = 0; b < branch_count; ++b) {
                TransversalCode c = w;
                c.symbols.insert(c.symbols.begin(), b);
                next.push_back(c);
            }
        std::sort(next.begin(), next.end());
        for (const auto& c : next) out.push_back(c);
        level = std::move(next);
    }
    return out;
}

} // namespace

DiscreteLamination build_preorbit_space(const PreorbitScheme& s) {
    if (s.depth < 0) fail(ErrorKind::input, "negative truncation depth");
    for (const auto& a : s.axes)
        if (a.count < 8) fail(ErrorKind::input, "preorbit grid needs >= 8 nodes per axis");

    DiscreteLamination lam;
    lam.space = s.space;
    lam.axes = s.axes;
    lam.depth = s.depth;
    lam.codes = code_tree(s.branch_count, s.depth);
    lam.metric_scale = Vec::Ones((int)s.axes.size());

    const int nodes = lam.node_count();
    lam.values.resize(lam.code_count());
    for (int c = 0; c < lam.code_count(); ++c) {
        Eigen::MatrixXd v(lam.n(), nodes);
        for (int f = 0; f < nodes; ++f) v.col(f) = s.embed(lam.node_params(f));
        lam.values[c] = std::move(v);
    }

    // branch solver consistency on the grid
    for (int f = 0; f < nodes; ++f) {
        Vec u = lam.node_params(f);
        auto pre = s.branches(u);
        if ((int)pre.size() != s.branch_count)
            fail(ErrorKind::scheme, "branch count varies over the region");
        for (const auto& y : pre) {
            Vec back = s.base_map(y);
            if (chart_distance(s.axes, back, u) > 1e-10)
                fail(ErrorKind::scheme, "branch solver output does not map back to its input");
        }
    }

    lam.default_monodromy();

    // trace branch continuation once around every periodic axis
    for (int k = 0; k < lam.d(); ++k) {
        const GridAxis& a = lam.axes[k];
        if (!a.periodic) continue;

        Vec u0(lam.d());
        for (int l = 0; l < lam.d(); ++l) {
            const GridAxis& al = lam.axes[l];
            u0[l] = al.periodic ? al.lo : al.lo + 0.5 * al.width;
        }

        const int steps = std::max(64, 4 * a.count);
        std::vector<int> succ(lam.code_count());
        succ[0] = 0; // the root (depth 0) is a single sheet

        // continuation of the full-depth chain; shallow codes are prefixes
        for (int c = 0; c < lam.code_count(); ++c) {
            const auto& code = lam.codes[c];
            if (code.depth() == 0) continue;
            std::vector<Vec> chain = preorbit_chain(s, code, u0);
            for (int st = 1; st <= steps; ++st) {
                Vec u = u0;
                u[k] += a.width * st / steps;
                std::vector<Vec> next(chain.size());
                next[0] = u;
                for (size_t m = 1; m < chain.size(); ++m) {
                    auto pre = s.branches(next[m - 1]);
                    int best = 0;
                    double bd = std::numeric_limits<double>::infinity();
                    for (int b = 0; b < (int)pre.size(); ++b) {
                        double dd = chart_distance(s.axes, pre[b], chain[m]);
                        if (dd < bd) {
                            bd = dd;
                            best = b;
                        }
                    }
                    next[m] = pre[best];
                }
                chain = std::move(next);
            }
            // identify the continued chain as a branch word
            TransversalCode w;
            for (size_t m = 1; m < chain.size(); ++m) {
                auto pre = s.branches(m == 1 ? u0 : chain[m - 1]);
                int best = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (int b = 0; b < (int)pre.size(); ++b) {
                    double dd = chart_distance(s.axes, pre[b], chain[m]);
                    if (dd < bd) {
                        bd = dd;
                        best = b;
                    }
                }
                if (bd > 1e-6) fail(ErrorKind::scheme, "monodromy trace lost a branch");
                w.symbols.push_back(best);
            }
            succ[c] = lam.code_index(w);
        }

        // ambient winding of the immersion around the loop
        Eigen::VectorXd offset = Eigen::VectorXd::Zero(lam.n());
        Vec prev = s.embed(u0);
        for (int st = 1; st <= steps; ++st) {
            Vec u = u0;
            u[k] += a.width * st / steps;
            Vec cur = s.embed(u);
            for (int j = 0; j < lam.n(); ++j) {
                double diff = cur[j] - prev[j];
                if (lam.space.kinds[j] == Factor::angle) {
                    while (diff > std::numbers::pi) diff -= kTwoPi;
                    while (diff < -std::numbers::pi) diff += kTwoPi;
                }
                offset[j] += diff;
            }
            prev = cur;
        }
        for (int j = 0; j < lam.n(); ++j) {
            if (lam.space.kinds[j] == Factor::angle)
                offset[j] = kTwoPi * std::round(offset[j] / kTwoPi);
            else if (std::fabs(offset[j]) > 1e-6)
                fail(ErrorKind::scheme, "ambient line coordinate winds around a periodic axis");
            else
                offset[j] = 0;
        }
        lam.set_monodromy(k, std::move(succ), std::move(offset));
    }

    lam.validate();
    return lam;
}

ShiftResult shift_forward(const PreorbitScheme& s, const TransversalCode& code, const Vec& u) {
    Vec u_img = s.base_map(u);
    int b0 = match_branch(s, u_img, u);
    TransversalCode c;
    c.symbols.push_back(b0);
    for (int m = 0; m + 1 < code.depth(); ++m) c.symbols.push_back(code.symbols[m]);
    return {c, u_img};
}

ShiftResult shift_inverse(const PreorbitScheme& s, const TransversalCode& code, const Vec& u,
                          int tail_branch) {
    if (code.depth() < 1)
        fail(ErrorKind::truncation, "inverse shift on a depth-0 code (rebuild at greater depth)");
    auto pre = s.branches(u);
    Vec u_pre = pre[code.symbols[0]];
    TransversalCode c;
    for (int m = 1; m < code.depth(); ++m) c.symbols.push_back(code.symbols[m]);
    c.symbols.push_back(tail_branch);
    return {c, u_pre};
}

ShiftResult tree_forward(const PreorbitScheme& s, const TransversalCode& code, const Vec& u) {
    Vec u_img = s.base_map(u);
    int b0 = match_branch(s, u_img, u);
    TransversalCode c;
    c.symbols.push_back(b0);
    for (int m = 0; m < code.depth() && (int)c.symbols.size() < s.depth; ++m)
        c.symbols.push_back(code.symbols[m]);
    return {c, u_img};
}

std::optional<ShiftResult> tree_inverse(const PreorbitScheme& s, const TransversalCode& code,
                                        const Vec& u) {
    if (code.depth() < 1) return std::nullopt;
    auto pre = s.branches(u);
    Vec u_pre = pre[code.symbols[0]];
    TransversalCode c;
    for (int m = 1; m < code.depth(); ++m) c.symbols.push_back(code.symbols[m]);
    return ShiftResult{c, u_pre};
}

} // namespace lamina
