#pragma once

#include <filesystem>
#include <json.hpp>

#include "lamina/holo.hpp"
#include "lamina/hyperbolic.hpp"
#include "lamina/verify.hpp"

namespace lamina {

using ordered_json = nlohmann::ordered_json;

ordered_json transform_report_json(const TransformReport& rep);
ordered_json estimate_json(const HyperbolicityEstimate& est);
ordered_json family_report_json(const FamilyReport& rep);

// CSV dumps: '.' decimal separator, '\n' line endings, %.17g round-trip
// precision, one row per node with the dot-joined code label first.
void write_section_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                       const Section& s);
void write_lamination_csv(const std::filesystem::path& path, const DiscreteLamination& lam);
void write_planes_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                      const PlaneField& pf);
void write_pullback_csv(const std::filesystem::path& path, const DiscreteLamination& lam,
                        const std::vector<PullbackEntry>& table);
// x-y plot series per leaf: leaf parameter against each fiber coordinate
void write_leaf_series(const std::filesystem::path& dir, const DiscreteLamination& lam,
                       const Section& s);

Section read_section_csv(const std::filesystem::path& path, const DiscreteLamination& lam);

} // namespace lamina
