#include "lamina/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lamina {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::FILE* open_out(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) fail(ErrorKind::input, "cannot open " + path.string() + " for writing");
    return f;
}

} // namespace

ordered_json transform_report_json(const TransformReport& rep) {
    ordered_json j;
    j["iterations"] = ordered_json::array();
    for (const auto& it : rep.iterations)
        j["iterations"].push_back(
            {{"k", it.k}, {"sup_distance", it.sup_distance}, {"ratio", it.ratio}});
    j["final_residual"] = rep.final_residual;
    j["newton"] = {{"max_iters", rep.newton.max_iterations}, {"failures", rep.newton.failures}};
    j["converged"] = rep.converged;
    j["stop_reason"] = rep.stop_reason;
    return j;
}

ordered_json estimate_json(const HyperbolicityEstimate& est) {
    ordered_json j;
    j["lambda"] = est.lambda;
    j["r_max"] = est.r_max;
    j["hyperbolic"] = est.hyperbolic;
    j["samples"] = est.samples;
    j["rates"] = {{"stable_max", est.stable_rate_max},
                  {"tangent_min", est.tangent_rate_min},
                  {"tangent_max", est.tangent_rate_max},
                  {"unstable_min",
                   std::isfinite(est.unstable_rate_min) ? est.unstable_rate_min : -1.0}};
    j["worst"] = {{"code", est.worst_code}, {"node", est.worst_node}};
    return j;
}

ordered_json family_report_json(const FamilyReport& rep) {
    ordered_json j;
    j["points"] = ordered_json::array();
    for (const auto& p : rep.points)
        j["points"].push_back({{"t", {p.t.real(), p.t.imag()}},
                               {"converged", p.converged},
                               {"sup_distance", p.sup_distance},
                               {"final_residual", p.final_residual},
                               {"iterations", p.iterations},
                               {"section_sup", p.section_sup}});
    j["parameter_cr_sup"] = rep.parameter_cr_sup;
    j["cr_error_bar"] = rep.cr_error_bar;
    j["warm_cold_gap"] = rep.warm_cold_gap;
    j["converged_radius"] = rep.converged_radius;
    j["coherence_constant"] = rep.coherence_constant;
    return j;
}

namespace {

void write_field_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                     const NodeField& field, const char* value_header) {
    std::FILE* f = open_out(path);
    std::string header = "code";
    for (int k = 0; k < lam.d(); ++k) header += ",u" + std::to_string(k);
    for (int ch = 0; ch < field.channels(); ++ch)
        header += "," + std::string(value_header) + std::to_string(ch);
    std::fprintf(f, "%s\n", header.c_str());
    for (int c = 0; c < lam.code_count(); ++c) {
        const std::string label = lam.codes[c].label();
        for (int fl = 0; fl < lam.node_count(); ++fl) {
            Vec u = lam.node_params(fl);
            std::string row = label;
            for (int k = 0; k < lam.d(); ++k) row += "," + num(u[k]);
            for (int ch = 0; ch < field.channels(); ++ch)
                row += "," + num(field.at(c, fl, ch));
            std::fprintf(f, "%s\n", row.c_str());
        }
    }
    std::fclose(f);
}

} // namespace

void write_section_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                       const Section& s) {
    write_field_csv(path, lam, s, "v");
}

void write_lamination_csv(const std::filesystem::path& path, const DiscreteLamination& lam) {
    write_field_csv(path, lam, immersion_field(lam), "x");
}

void write_planes_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                      const PlaneField& pf) {
    write_field_csv(path, lam, pf, "l");
}

void write_pullback_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                        const std::vector<PullbackEntry>& table) {
    std::FILE* f = open_out(path);
    std::string header = "code";
    for (int k = 0; k < lam.d(); ++k) header += ",u" + std::to_string(k);
    header += ",image_code";
    for (int k = 0; k < lam.d(); ++k) header += ",image_u" + std::to_string(k);
    header += ",residual";
    std::fprintf(f, "%s\n", header.c_str());
    for (const auto& e : table) {
        Vec u = lam.node_params(e.flat);
        std::string row = lam.codes[e.code].label();
        for (int k = 0; k < lam.d(); ++k) row += "," + num(u[k]);
        if (e.image_code >= 0) {
            row += "," + lam.codes[e.image_code].label();
            for (int k = 0; k < lam.d(); ++k) row += "," + num(e.image_u[k]);
            row += "," + num(e.residual);
        } else {
            row += ",-";
            for (int k = 0; k < lam.d(); ++k) row += ",";
            row += ",";
        }
        std::fprintf(f, "%s\n", row.c_str());
    }
    std::fclose(f);
}

void write_leaf_series(const std::filesystem::path& dir, const DiscreteLamination& lam,
                       const Section& s) {
    std::filesystem::create_directories(dir);
    // series along the first leaf axis at the base of the other axes
    for (int c : lam.primary_codes()) {
        std::filesystem::path p = dir / ("leaf_" + lam.codes[c].label() + ".csv");
        std::FILE* f = open_out(p);
        std::string header = "u0";
        for (int ch = 0; ch < s.channels(); ++ch) header += ",v" + std::to_string(ch);
        std::fprintf(f, "%s\n", header.c_str());
        for (int j = 0; j < lam.axes[0].count; ++j) {
            std::string row = num(lam.axes[0].coord(j));
            for (int ch = 0; ch < s.channels(); ++ch) row += "," + num(s.at(c, j, ch));
            std::fprintf(f, "%s\n", row.c_str());
        }
        std::fclose(f);
    }
}

Section read_section_csv(const std::filesystem::path& path, const DiscreteLamination& lam) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::input, "cannot read " + path.string());
    Section s = zero_section(lam);
    std::string line;
    std::getline(in, line); // header
    long rows = 0;
    std::vector<int> flat_count(lam.code_count(), 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        TransversalCode code;
        if (cell != "-") {
            std::stringstream cs(cell);
            std::string sym;
            while (std::getline(cs, sym, '.')) code.symbols.push_back(std::stoi(sym));
        }
        int c = lam.code_index(code);
        for (int k = 0; k < lam.d(); ++k) std::getline(ss, cell, ',');
        int fl = flat_count[c]++;
        if (fl >= lam.node_count()) fail(ErrorKind::input, "section csv has too many rows");
        for (int ch = 0; ch < s.channels(); ++ch) {
            if (!std::getline(ss, cell, ','))
                fail(ErrorKind::input, "section csv row too short");
            s.at(c, fl, ch) = std::stod(cell);
        }
        ++rows;
    }
    if (rows != lam.total_nodes())
        fail(ErrorKind::input, "section csv row count does not match the lamination");
    return s;
}

} // namespace lamina
