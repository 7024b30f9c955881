#include "dynloc/svg.hpp"

#include <fmt/format.h>

#include "dynloc/scene_io.hpp"

namespace dynloc {

namespace {

std::string ring_path(const Ring& ring) {
    std::string d;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        d += fmt::format("{}{} {} ", i == 0 ? "M" : "L", ring[i].x, -ring[i].y);
    }
    d += "Z";
    return d;
}

std::string polygon_path(const Polygon& poly) {
    std::string d = ring_path(poly.outer);
    for (const Ring& h : poly.holes) d += " " + ring_path(h);
    return d;
}

void pose_marker(std::string& out, const Pose& q, double radius, const char* cls, const char* color, double stroke) {
    const Point2 tip = q.position + heading_vector(q.theta) * (2.5 * radius);
    out += fmt::format("  <circle class=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n", cls, q.position.x,
                       -q.position.y, radius, color);
    out += fmt::format("  <line class=\"{}-heading\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                       cls, q.position.x, -q.position.y, tip.x, -tip.y, color, stroke);
}

}  // namespace

std::string render_svg(const Scene& scene, const TrialSetup* trial, const LocalizationResult* result) {
    const Box box = aabb(scene.workspace);
    const double margin = 0.05 * box.diagonal();
    const double stroke = box.diagonal() / 400.0;
    const double marker = box.diagonal() / 120.0;
    const double vx = box.min.x - margin;
    const double vy = -box.max.y - margin;
    const double vw = box.width() + 2 * margin;
    const double vh = box.height() + 2 * margin;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"800\" height=\"{}\">\n",
        vx, vy, vw, vh, static_cast<int>(800.0 * vh / vw));
    out += fmt::format("  <path class=\"workspace\" d=\"{}\" fill=\"#d9d9d9\" fill-rule=\"evenodd\" stroke=\"#000000\" stroke-width=\"{}\"/>\n",
                       polygon_path(scene.workspace), stroke);

    const double t = trial && !trial->measurements.empty() ? trial->measurements.front().t : 0.0;
    for (const Obstacle& o : scene.obstacles) {
        out += fmt::format("  <path class=\"obstacle\" d=\"{}\" fill=\"#606060\" fill-rule=\"evenodd\" stroke=\"none\"/>\n",
                           polygon_path(o.placed(t)));
    }

    if (trial) {
        for (std::size_t i = 0; i < trial->measurements.size(); ++i) {
            const MeasurementSpec& m = trial->measurements[i];
            const Pose sensor = measurement_pose(trial->ground_truth, m);
            const Point2 end = sensor.position + heading_vector(sensor.theta) * m.d;
            const bool is_static = trial->static_flags[i];
            out += fmt::format(
                "  <line class=\"ray {}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                is_static ? "static" : "dynamic", sensor.position.x, -sensor.position.y, end.x, -end.y,
                is_static ? "#ff00ff" : "#ff0000", stroke);
        }
        pose_marker(out, trial->ground_truth, marker, "ground-truth", "#0000ff", stroke);
    }
    if (result) {
        for (const CandidatePose& c : result->candidates) pose_marker(out, c.pose, 0.7 * marker, "candidate", "#00a000", stroke);
    }
    out += "</svg>\n";
    return out;
}

void write_svg(const std::filesystem::path& path, const Scene& scene, const TrialSetup* trial,
               const LocalizationResult* result) {
    write_text_file(path, render_svg(scene, trial, result));
}

}  // namespace dynloc
