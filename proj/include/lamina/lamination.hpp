#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lamina/state_space.hpp"

namespace lamina {

// Branch-choice word indexing a transversal point. Words of full truncation
// depth are the primary codes; shorter words are interior tree codes kept so
// pullback chains bottom out at the base instead of at an arbitrary pad.
struct TransversalCode {
    std::vector<int> symbols;

    int depth() const { return (int)symbols.size(); }
    std::string label() const {
        if (symbols.empty()) return "-";
        std::string s;
        for (size_t i = 0; i < symbols.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(symbols[i]);
        }
        return s;
    }
    bool operator==(const TransversalCode& o) const { return symbols == o.symbols; }
    bool operator<(const TransversalCode& o) const { return symbols < o.symbols; }
};

struct GridAxis {
    bool periodic = false; // full angle circle of circumference `width`
    double lo = 0.0;
    double width = kTwoPi;
    int count = 0; // nodes; periodic axes omit the duplicate endpoint

    double spacing() const { return periodic ? width / count : width / (count - 1); }
    double hi() const { return lo + width; }
    double coord(int j) const { return lo + spacing() * j; }
};

// Identifies the continuation of a leaf across the seam of a periodic axis:
// going once around axis `k` lands on code succ[c], and stored ambient values
// continue with `ambient_offset` added (winding of ambient angle coordinates).
struct AxisMonodromy {
    std::vector<int> succ;
    std::vector<int> pred;
    Eigen::VectorXd ambient_offset;
};

// Axis-aligned core (V') and support (V) boxes for the bump function, in leaf
// parameters. Unbounded axes use +inf half-widths.
struct MarkedRegion {
    bool everything = true;
    Vec center;
    Vec inner_hw;
    Vec outer_hw;
};

double smoothstep_quintic(double t);

struct DiscreteLamination {
    StateSpace space;
    std::vector<GridAxis> axes;
    std::vector<TransversalCode> codes; // full tree, depth-major order
    int depth = 0;                      // truncation depth of the transversal
    std::vector<Eigen::MatrixXd> values; // per code: n x node_count, angles unwrapped
    std::vector<std::optional<AxisMonodromy>> monodromy; // per axis
    Vec metric_scale;
    MarkedRegion marked;
    std::string scenario;

    int d() const { return (int)axes.size(); }
    int n() const { return space.n; }
    int node_count() const;
    int code_count() const { return (int)codes.size(); }
    long total_nodes() const { return (long)code_count() * node_count(); }

    std::vector<int> primary_codes() const; // indices with depth == this->depth
    int code_index(const TransversalCode& c) const;
    bool has_code(const TransversalCode& c) const;

    // flat node index <-> multi-index
    int flat_index(const std::vector<int>& j) const;
    std::vector<int> multi_index(int flat) const;
    Vec node_params(int flat) const;

    // identity monodromy for all periodic axes, no ambient winding
    void default_monodromy();
    void set_monodromy(int axis, std::vector<int> succ, Eigen::VectorXd ambient_offset);

    // bump value at leaf parameters (1 on V', 0 outside V)
    double bump(const Vec& u) const;
    // leaf-gradient of the bump (finite differences of the analytic profile)
    Vec bump_gradient(const Vec& u) const;

    void validate() const;

private:
    mutable std::map<std::vector<int>, int> index_; // lazily built
    void build_index() const;
};

// Values attached to grid nodes (ambient points, fiber coordinates, frames,
// plane matrices), interpolated by local cubic Lagrange per axis with
// monodromy-aware stencils. `ambient_offsets` selects whether seam crossings
// add the axis winding offsets (true only for fields storing ambient points).
class NodeField {
public:
    NodeField() = default;
    NodeField(const DiscreteLamination* lam, int channels, bool ambient_offsets);

    int channels() const { return channels_; }
    const DiscreteLamination& lam() const { return *lam_; }

    Eigen::MatrixXd& data(int code) { return data_[code]; }
    const Eigen::MatrixXd& data(int code) const { return data_[code]; }

    double& at(int code, int flat, int ch) { return data_[code](ch, flat); }
    double at(int code, int flat, int ch) const { return data_[code](ch, flat); }
    Vec node_value(int code, int flat) const { return data_[code].col(flat); }
    void set_node_value(int code, int flat, const Vec& v) { data_[code].col(flat) = v; }

    // Interpolated value at leaf parameters u on the leaf through `code`.
    // Parameters beyond periodic seams switch codes via the monodromy; line
    // axis parameters outside the domain raise a domain error.
    Vec eval(int code, Vec u) const;
    // Value plus derivative columns d(value)/d(u_k).
    void eval_jet(int code, Vec u, Vec& value, Eigen::MatrixXd& deriv) const;

    // sup |this - other| over all nodes, serial fixed order
    double sup_distance(const NodeField& other) const;
    double sup_norm() const;

    void fill_zero();

private:
    const DiscreteLamination* lam_ = nullptr;
    int channels_ = 0;
    bool ambient_offsets_ = false;
    std::vector<Eigen::MatrixXd> data_;

    struct AxisPlan {
        int base;         // first stencil node (may be <0 or >=count on periodic axes)
        double w[4];      // value weights
        double dw[4];     // derivative weights (d/du)
    };
    void plan(int axis, double u, AxisPlan& p) const;
    friend class StencilCursor;
};

// ---- lamination operations -------------------------------------------------

// Immersion value at (code, u), wrapped into the ambient space.
Vec evaluate_immersion(const DiscreteLamination& lam, const NodeField& values, int code,
                       const Vec& u);

// Leafwise distance: arclength of the immersed straight parameter segment,
// pullback metric weighted by metric_scale per axis.
double leaf_distance(const DiscreteLamination& lam, const NodeField& values, int code,
                     const Vec& u1, const Vec& u2, int min_samples = 8);

struct ParameterBox {
    Vec center;
    Vec half_width;
};

// Largest centered parameter box whose leafwise diameter is <= eps.
ParameterBox plaque_neighborhood(const DiscreteLamination& lam, const NodeField& values,
                                 int code, const Vec& u, double eps);

// The stored immersion as a NodeField view (shares no storage; copies).
NodeField immersion_field(const DiscreteLamination& lam);

} // namespace lamina
