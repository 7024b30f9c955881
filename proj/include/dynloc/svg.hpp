#pragma once
// SVG 1.1 rendering of a scene, an optional trial (ground truth and measured
// rays) and optional localization candidates. World y points up; the document
// stores -y so the picture is not mirrored.

#include <filesystem>
#include <string>

#include "dynloc/fusion.hpp"
#include "dynloc/simworld.hpp"

namespace dynloc {

/// Rays are <line class="ray static"> (magenta) or <line class="ray dynamic">
/// (red) spanning exactly the measured distance.
std::string render_svg(const Scene& scene, const TrialSetup* trial = nullptr,
                       const LocalizationResult* result = nullptr);

void write_svg(const std::filesystem::path& path, const Scene& scene, const TrialSetup* trial = nullptr,
               const LocalizationResult* result = nullptr);

}  // namespace dynloc
