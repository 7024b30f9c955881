#include "dynloc/scene_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dynloc {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw FormatError("field " + field + ": " + what);
}

double number_at(const json& j, const std::string& field) {
    if (!j.is_number()) field_error(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) field_error(field, "non-finite number");
    return v;
}

Point2 point_at(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) field_error(field, "expected [x, y]");
    return {number_at(j[0], field + "[0]"), number_at(j[1], field + "[1]")};
}

Ring ring_at(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "expected an array of points");
    Ring ring;
    for (std::size_t i = 0; i < j.size(); ++i) ring.push_back(point_at(j[i], field + "[" + std::to_string(i) + "]"));
    return ring;
}

Polygon polygon_at(const json& j, const std::string& field) {
    if (!j.is_object()) field_error(field, "expected an object with \"outer\"");
    if (!j.contains("outer")) field_error(field + ".outer", "missing");
    Polygon poly{ring_at(j["outer"], field + ".outer"), {}};
    if (j.contains("holes")) {
        const json& holes = j["holes"];
        if (!holes.is_array()) field_error(field + ".holes", "expected an array of rings");
        for (std::size_t h = 0; h < holes.size(); ++h) {
            poly.holes.push_back(ring_at(holes[h], field + ".holes[" + std::to_string(h) + "]"));
        }
    }
    return poly;
}

std::string num(double v) { return json(v).dump(); }

void write_ring(std::ostringstream& os, const Ring& ring) {
    os << '[';
    for (std::size_t i = 0; i < ring.size(); ++i) {
        if (i) os << ", ";
        os << '[' << num(ring[i].x) << ", " << num(ring[i].y) << ']';
    }
    os << ']';
}

void write_polygon(std::ostringstream& os, const Polygon& poly, const std::string& indent) {
    os << "{\n" << indent << "  \"outer\": ";
    write_ring(os, poly.outer);
    os << ",\n" << indent << "  \"holes\": [";
    for (std::size_t h = 0; h < poly.holes.size(); ++h) {
        os << (h ? ",\n" : "\n") << indent << "    ";
        write_ring(os, poly.holes[h]);
    }
    if (!poly.holes.empty()) os << '\n' << indent << "  ";
    os << "]\n" << indent << '}';
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

Scene parse_scene(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError("line " + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)) + ": " + e.what());
    }
    if (!doc.is_object()) field_error("<root>", "expected an object");
    if (!doc.contains("workspace")) field_error("workspace", "missing");

    Scene scene;
    scene.workspace = polygon_at(doc["workspace"], "workspace");
    if (auto v = validate(scene.workspace)) throw SceneValidationError("workspace", *v);

    if (doc.contains("obstacles")) {
        const json& obstacles = doc["obstacles"];
        if (!obstacles.is_array()) field_error("obstacles", "expected an array");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const std::string field = "obstacles[" + std::to_string(i) + "]";
            const json& o = obstacles[i];
            if (!o.is_object() || !o.contains("shape")) field_error(field + ".shape", "missing");
            Polygon shape = polygon_at(o["shape"], field + ".shape");
            if (auto v = validate(shape)) throw SceneValidationError(field + ".shape", *v);
            RigidMotion placement;
            if (o.contains("placement")) {
                const json& p = o["placement"];
                if (!p.is_array() || p.size() != 3) field_error(field + ".placement", "expected [tx, ty, rot]");
                placement = RigidMotion({number_at(p[0], field + ".placement[0]"), number_at(p[1], field + ".placement[1]")},
                                        number_at(p[2], field + ".placement[2]"));
            }
            scene.obstacles.push_back({std::move(shape), Trajectory::stationary(placement)});
        }
    }
    return scene;
}

std::string serialize_scene(const Scene& scene) {
    std::ostringstream os;
    os << "{\n  \"workspace\": ";
    write_polygon(os, scene.workspace, "  ");
    os << ",\n  \"obstacles\": [";
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const Obstacle& o = scene.obstacles[i];
        if (!o.trajectory.is_stationary()) throw FormatError("obstacle " + std::to_string(i) + " has a moving trajectory");
        const RigidMotion p = o.trajectory.at(0.0);
        os << (i ? ",\n" : "\n") << "    {\n      \"shape\": ";
        write_polygon(os, o.shape, "      ");
        os << ",\n      \"placement\": [" << num(p.translation.x) << ", " << num(p.translation.y) << ", "
           << num(p.rotation) << "]\n    }";
    }
    if (!scene.obstacles.empty()) os << "\n  ";
    os << "]\n}\n";
    return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

Scene load_scene(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_scene(text);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_scene(const Scene& scene, const std::filesystem::path& path) { write_text_file(path, serialize_scene(scene)); }

std::vector<MeasurementSpec> parse_measurements(std::string_view text) {
    std::vector<MeasurementSpec> out;
    std::istringstream in{std::string(text)};
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<double> values;
        std::istringstream row(line);
        std::string cell;
        static constexpr const char* kFields[] = {"tx", "ty", "rot", "d"};
        while (std::getline(row, cell, ',')) {
            const std::string name = values.size() < 4 ? kFields[values.size()] : "extra";
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos || !std::isfinite(v)) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw FormatError("line " + std::to_string(lineno) + ", field " + name + ": not a number");
            }
        }
        if (values.size() != 4) {
            throw FormatError("line " + std::to_string(lineno) + ": expected 4 fields tx,ty,rot,d, got " +
                              std::to_string(values.size()));
        }
        if (values[3] < 0.0) throw FormatError("line " + std::to_string(lineno) + ", field d: negative distance");
        out.push_back({RigidMotion({values[0], values[1]}, values[2]), values[3], 0.0, 0.0});
    }
    return out;
}

std::vector<MeasurementSpec> load_measurements(const std::filesystem::path& path) {
    return parse_measurements(read_text_file(path));
}

std::string serialize_measurements(const std::vector<MeasurementSpec>& ms) {
    std::ostringstream os;
    os << "# tx,ty,rot,d\n";
    for (const MeasurementSpec& m : ms) {
        os << num(m.g.translation.x) << ',' << num(m.g.translation.y) << ',' << num(m.g.rotation) << ',' << num(m.d) << '\n';
    }
    return os.str();
}

Scene resolve_scene(const std::string& source, std::uint64_t seed) {
    if (auto s = builtin_scene(source, seed)) return *s;
    return load_scene(source);
}

}  // namespace dynloc
