#include "dynloc/scene_io.hpp"

namespace dynloc {

namespace {

Ring rect_hole(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x0, y1}, {x1, y1}, {x1, y0}};
}

Scene square_room() {
    return {Polygon{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {}}, {}};
}

// 40-vertex outline of a cluttered lab, with scan-like noise on the long walls.
Scene lab_lidar_like() {
    Ring outer{{0, 0},          {1.408, -0.059},  {2.75, -0.042},  {4.097, -0.008}, {5.5, 0},       {5.5, -0.6},
               {6.705, -0.564}, {8.0, -0.6},      {8.0, 0},        {10.0, -0.084},  {12.0, 0.036},  {14, 0},
               {13.959, 1.492}, {14, 3.0},        {13.2, 3.0},     {13.2, 4.2},     {14, 4.2},      {14.013, 5.381},
               {14.103, 6.6},   {14.03, 7.764},   {14, 9},         {12.237, 8.956}, {10.5, 9},      {10.5, 7.8},
               {9.0, 7.8},      {9.0, 9},         {7.795, 9.003},  {6.5, 8.991},    {5.24, 9.043},  {4.0, 9},
               {4.0, 8.2},      {2.2, 8.2},       {2.2, 9},        {0, 9},          {0.001, 7.254}, {0, 5.6},
               {0.7, 5.6},      {0.7, 3.4},       {0, 3.4},        {-0.007, 1.657}};
    return {Polygon{std::move(outer), {}}, {}};
}

// L-shaped floor with partition walls (holes) leaving door gaps, and a column.
Scene floor_plan_like() {
    Polygon w{{{0, 0}, {16, 0}, {16, 7}, {12, 7}, {12, 12}, {0, 12}},
              {rect_hole(6, 1.2, 6.2, 5.0), rect_hole(6, 6.0, 6.2, 11.0), rect_hole(0.8, 6.0, 5.0, 6.2),
               rect_hole(7.5, 4.0, 14.8, 4.2), rect_hole(9.5, 8.5, 10.0, 9.0), rect_hole(11.0, 0.8, 11.2, 3.0)}};
    return {std::move(w), {}};
}

}  // namespace

const std::vector<std::string>& builtin_scene_names() {
    static const std::vector<std::string> names{"square-room", "lab-lidar-like", "floor-plan-like", "random"};
    return names;
}

std::optional<Scene> builtin_scene(std::string_view name, std::uint64_t seed) {
    if (name == "square-room") return square_room();
    if (name == "lab-lidar-like") return lab_lidar_like();
    if (name == "floor-plan-like") return floor_plan_like();
    if (name == "random") return Scene{random_polygon(seed, 16, 5.0, 0.4), {}};
    return std::nullopt;
}

}  // namespace dynloc
