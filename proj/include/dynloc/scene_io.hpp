#pragma once
// Scene and measurement file formats, plus the builtin scenes.
//
// Scene file (JSON):
//   {"workspace": {"outer": [[x,y],...], "holes": [[[x,y],...], ...]},
//    "obstacles": [{"shape": {"outer": ..., "holes": ...}, "placement": [tx,ty,rot]}]}
//
// Measurement file: one `tx,ty,rot,d` row per measurement; blank lines and
// lines starting with '#' are ignored.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynloc/geometry.hpp"
#include "dynloc/preimage.hpp"
#include "dynloc/simworld.hpp"

namespace dynloc {

/// Malformed input; the message names the line and/or field.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input describing an invalid polygon.
class SceneValidationError : public std::runtime_error {
public:
    SceneValidationError(std::string where, Violation v)
        : std::runtime_error(where + ": " + v.describe()), where_(std::move(where)), violation_(v) {}

    const std::string& where() const { return where_; }
    const Violation& violation() const { return violation_; }

private:
    std::string where_;
    Violation violation_;
};

Scene parse_scene(std::string_view text);
std::string serialize_scene(const Scene& scene);
Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

std::vector<MeasurementSpec> parse_measurements(std::string_view text);
std::vector<MeasurementSpec> load_measurements(const std::filesystem::path& path);
std::string serialize_measurements(const std::vector<MeasurementSpec>& ms);

/// Names accepted by builtin_scene().
const std::vector<std::string>& builtin_scene_names();

/// Builtin scene by name; "random" draws a workspace from `seed`.
std::optional<Scene> builtin_scene(std::string_view name, std::uint64_t seed = 0);

/// Builtin name or scene file path.
Scene resolve_scene(const std::string& source, std::uint64_t seed = 0);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dynloc
