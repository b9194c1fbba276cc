#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokuq/field_analysis.hpp"
#include "tokuq/solver.hpp"
#include "tokuq/uq.hpp"

namespace tokuq {

nlohmann::ordered_json features_json(const FieldFeatures& f);
nlohmann::ordered_json solution_json(const EquilibriumSolution& sol, const FieldFeatures& f);
/// Everything except per-sample rows and timings, so reruns compare equal.
nlohmann::ordered_json mc_report_json(const McReport& r, bool with_timing = true);

/// One row per sample, 17 significant digits.
void write_samples_csv(const McReport& r, const std::filesystem::path& path, bool with_timing = false);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Geometry outline, psi contours, plasma boundary and critical points.
std::string equilibrium_svg(const ReactorGeometry& g, const NodalField& psi, const FieldFeatures& f, int contours = 24);
/// Geometry outline with x-point, strike-point and contact-point clouds.
std::string scatter_svg(const ReactorGeometry& g, const McReport& r);

}  // namespace tokuq
