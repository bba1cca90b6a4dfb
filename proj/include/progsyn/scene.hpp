#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace progsyn {

enum class Shape { cube, sphere, cylinder };
enum class Color { gray, blue, brown, yellow, red, green, purple, cyan };
enum class Material { rubber, metal };
enum class SizeClass { small, large };

std::string_view to_word(Shape s);
std::string_view to_word(Color c);
std::string_view to_word(Material m);
std::string_view to_word(SizeClass z);

Shape shape_from_word(std::string_view w);          // accepts "square" as an alias for cube
Color color_from_word(std::string_view w);
Material material_from_word(std::string_view w);
SizeClass size_class_from_word(std::string_view w);

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

struct PixelPoint {
    double u = 0, v = 0;
};

struct PixelBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
};

// Intersection-over-union of two pixel boxes; 0 when disjoint.
double box_iou(const PixelBox& a, const PixelBox& b);

struct Object3D {
    int id = 0;
    Shape shape = Shape::cube;
    Color color = Color::gray;
    Material material = Material::rubber;
    SizeClass size_class = SizeClass::small;
    Vec3 center;   // camera frame, meters: +x right, +y down, +z forward
    Vec3 extents;  // full width/height/depth of the axis-aligned volume
};

struct Camera {
    double focal_px = 350.0;
    double principal_u = 240.0;
    double principal_v = 160.0;
    int image_width = 480;
    int image_height = 320;
};

struct Scene {
    std::vector<Object3D> objects;
    Camera camera;
    std::uint64_t seed = 0;
    double size_cut = 0.5;  // small/large boundary on max extent, meters
};

struct UnknownObjectError : std::runtime_error {
    explicit UnknownObjectError(int id)
        : std::runtime_error("unknown object id " + std::to_string(id)) {}
};
struct OutOfRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PlacementFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SceneInvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PixelPoint project_point(const Camera& cam, const Vec3& p);

// Perspective projection of the object's center.
PixelPoint project_center(const Scene& scene, int object_id);

// Pixel hull of the eight corners of the object's axis-aligned volume,
// clipped to the image bounds.
PixelBox project_bbox(const Scene& scene, int object_id);

// Depth is camera-frame z, not Euclidean distance.
double ground_truth_depth(const Scene& scene, int object_id);

const Object3D& find_object(const Scene& scene, int object_id);

// Throws SceneInvariantError when any structural invariant is violated:
// object count in [2,10], dense unique ids, positive depths and extents,
// size_class consistent with size_cut, every projected center strictly
// inside the image, and pairwise projected-center separation >= 12 px.
void validate_scene(const Scene& scene);

inline constexpr double kCenterSeparationPx = 12.0;

// Deterministic for a fixed (seed, n_objects, camera). Rejection-samples
// placements until the separation margin holds; throws OutOfRangeError for
// n_objects outside [2,10] and PlacementFailureError after 10,000 draws.
Scene generate_scene(std::uint64_t seed, int n_objects, const Camera& camera = {});

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

Scene read_scene(const std::filesystem::path& file);
void write_scene(const Scene& scene, const std::filesystem::path& file);

// Shortest decimal text that round-trips the value (via std::to_chars).
std::string format_double(double v);

} // namespace progsyn
