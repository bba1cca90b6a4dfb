#include "progsyn/scene.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "progsyn/rng.hpp"

namespace progsyn {

namespace {

constexpr std::array<std::string_view, 3> kShapeWords = {"cube", "sphere", "cylinder"};
constexpr std::array<std::string_view, 8> kColorWords = {"gray", "blue", "brown", "yellow",
                                                         "red",  "green", "purple", "cyan"};
constexpr std::array<std::string_view, 2> kMaterialWords = {"rubber", "metal"};
constexpr std::array<std::string_view, 2> kSizeWords = {"small", "large"};

[[noreturn]] void bad_word(std::string_view kind, std::string_view w) {
    throw std::invalid_argument("not a " + std::string(kind) + " word: '" + std::string(w) + "'");
}

} // namespace

std::string_view to_word(Shape s) { return kShapeWords[static_cast<int>(s)]; }
std::string_view to_word(Color c) { return kColorWords[static_cast<int>(c)]; }
std::string_view to_word(Material m) { return kMaterialWords[static_cast<int>(m)]; }
std::string_view to_word(SizeClass z) { return kSizeWords[static_cast<int>(z)]; }

Shape shape_from_word(std::string_view w) {
    if (w == "square") return Shape::cube;  // CLEVR prompt vocabulary
    for (std::size_t i = 0; i < kShapeWords.size(); ++i)
        if (w == kShapeWords[i]) return static_cast<Shape>(i);
    bad_word("shape", w);
}

Color color_from_word(std::string_view w) {
    for (std::size_t i = 0; i < kColorWords.size(); ++i)
        if (w == kColorWords[i]) return static_cast<Color>(i);
    bad_word("color", w);
}

Material material_from_word(std::string_view w) {
    for (std::size_t i = 0; i < kMaterialWords.size(); ++i)
        if (w == kMaterialWords[i]) return static_cast<Material>(i);
    bad_word("material", w);
}

SizeClass size_class_from_word(std::string_view w) {
    for (std::size_t i = 0; i < kSizeWords.size(); ++i)
        if (w == kSizeWords[i]) return static_cast<SizeClass>(i);
    bad_word("size", w);
}

double box_iou(const PixelBox& a, const PixelBox& b) {
    double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0 || iy <= 0) return 0.0;
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

PixelPoint project_point(const Camera& cam, const Vec3& p) {
    return {cam.focal_px * p.x / p.z + cam.principal_u,
            cam.focal_px * p.y / p.z + cam.principal_v};
}

const Object3D& find_object(const Scene& scene, int object_id) {
    if (object_id >= 0 && object_id < static_cast<int>(scene.objects.size())) {
        const Object3D& o = scene.objects[static_cast<std::size_t>(object_id)];
        if (o.id == object_id) return o;
    }
    for (const Object3D& o : scene.objects)
        if (o.id == object_id) return o;
    throw UnknownObjectError(object_id);
}

PixelPoint project_center(const Scene& scene, int object_id) {
    return project_point(scene.camera, find_object(scene, object_id).center);
}

PixelBox project_bbox(const Scene& scene, int object_id) {
    const Object3D& o = find_object(scene, object_id);
    PixelBox box{1e300, 1e300, -1e300, -1e300};
    for (int corner = 0; corner < 8; ++corner) {
        Vec3 p{o.center.x + (corner & 1 ? 0.5 : -0.5) * o.extents.x,
               o.center.y + (corner & 2 ? 0.5 : -0.5) * o.extents.y,
               o.center.z + (corner & 4 ? 0.5 : -0.5) * o.extents.z};
        PixelPoint q = project_point(scene.camera, p);
        box.x_min = std::min(box.x_min, q.u);
        box.y_min = std::min(box.y_min, q.v);
        box.x_max = std::max(box.x_max, q.u);
        box.y_max = std::max(box.y_max, q.v);
    }
    box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(scene.camera.image_width));
    box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(scene.camera.image_width));
    box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(scene.camera.image_height));
    box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(scene.camera.image_height));
    return box;
}

double ground_truth_depth(const Scene& scene, int object_id) {
    return find_object(scene, object_id).center.z;
}

namespace {

void validate_camera(const Camera& cam) {
    if (cam.focal_px <= 0) throw SceneInvariantError("camera focal length must be positive");
    if (cam.image_width <= 0 || cam.image_height <= 0)
        throw SceneInvariantError("image size must be positive");
    if (cam.principal_u < 0 || cam.principal_u > cam.image_width ||
        cam.principal_v < 0 || cam.principal_v > cam.image_height)
        throw SceneInvariantError("principal point must lie inside the image");
}

} // namespace

void validate_scene(const Scene& scene) {
    validate_camera(scene.camera);
    std::size_t n = scene.objects.size();
    if (n < 2 || n > 10)
        throw SceneInvariantError("scene must contain between 2 and 10 objects");
    std::vector<PixelPoint> centers;
    centers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Object3D& o = scene.objects[i];
        if (o.id != static_cast<int>(i))
            throw SceneInvariantError("object ids must be dense from 0 in order");
        if (o.center.z <= 0) throw SceneInvariantError("object depth must be positive");
        if (o.extents.x <= 0 || o.extents.y <= 0 || o.extents.z <= 0)
            throw SceneInvariantError("object extents must be positive");
        double max_extent = std::max({o.extents.x, o.extents.y, o.extents.z});
        bool is_small = max_extent < scene.size_cut;
        if (is_small != (o.size_class == SizeClass::small))
            throw SceneInvariantError("size_class inconsistent with extents for object " +
                                      std::to_string(o.id));
        PixelPoint p = project_point(scene.camera, o.center);
        if (p.u <= 0 || p.u >= scene.camera.image_width || p.v <= 0 ||
            p.v >= scene.camera.image_height)
            throw SceneInvariantError("projected center outside image for object " +
                                      std::to_string(o.id));
        centers.push_back(p);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double du = centers[i].u - centers[j].u;
            double dv = centers[i].v - centers[j].v;
            if (std::sqrt(du * du + dv * dv) < kCenterSeparationPx)
                throw SceneInvariantError("projected centers closer than separation margin");
        }
}

Scene generate_scene(std::uint64_t seed, int n_objects, const Camera& camera) {
    if (n_objects < 2 || n_objects > 10)
        throw OutOfRangeError("n_objects must be in [2,10], got " + std::to_string(n_objects));
    validate_camera(camera);

    Scene scene;
    scene.camera = camera;
    scene.seed = seed;

    Rng rng(mix64(seed));
    constexpr int kMaxDraws = 10000;
    int draws = 0;

    // sample centers in an inset pixel window and back-project, so every
    // center lands strictly inside the image by construction
    double u_lo = 0.05 * camera.image_width, u_hi = 0.95 * camera.image_width;
    double v_lo = 0.05 * camera.image_height, v_hi = 0.95 * camera.image_height;

    std::vector<PixelPoint> placed;
    for (int i = 0; i < n_objects; ++i) {
        Object3D obj;
        obj.id = i;
        obj.shape = static_cast<Shape>(rng.uniform_int(0, 2));
        obj.color = static_cast<Color>(rng.uniform_int(0, 7));
        obj.material = static_cast<Material>(rng.uniform_int(0, 1));
        obj.size_class = static_cast<SizeClass>(rng.uniform_int(0, 1));
        for (int axis = 0; axis < 3; ++axis) {
            double e = obj.size_class == SizeClass::small ? rng.uniform(0.15, 0.45)
                                                          : rng.uniform(0.55, 1.10);
            (axis == 0 ? obj.extents.x : axis == 1 ? obj.extents.y : obj.extents.z) = e;
        }

        while (true) {
            if (++draws > kMaxDraws)
                throw PlacementFailureError("could not satisfy the separation margin after " +
                                            std::to_string(kMaxDraws) + " placement draws");
            double u = rng.uniform(u_lo, u_hi);
            double v = rng.uniform(v_lo, v_hi);
            double z = rng.uniform(3.0, 10.0);
            bool ok = true;
            for (const PixelPoint& q : placed) {
                double du = u - q.u, dv = v - q.v;
                if (du * du + dv * dv < kCenterSeparationPx * kCenterSeparationPx) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            obj.center = {(u - camera.principal_u) * z / camera.focal_px,
                          (v - camera.principal_v) * z / camera.focal_px, z};
            placed.push_back({u, v});
            break;
        }
        scene.objects.push_back(obj);
    }
    validate_scene(scene);
    return scene;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["seed"] = scene.seed;
    j["size_cut"] = scene.size_cut;
    j["camera"] = {{"focal_px", scene.camera.focal_px},
                   {"principal", {scene.camera.principal_u, scene.camera.principal_v}},
                   {"image_size", {scene.camera.image_width, scene.camera.image_height}}};
    nlohmann::json objs = nlohmann::json::array();
    for (const Object3D& o : scene.objects) {
        objs.push_back({{"id", o.id},
                        {"shape", to_word(o.shape)},
                        {"color", to_word(o.color)},
                        {"material", to_word(o.material)},
                        {"size_class", to_word(o.size_class)},
                        {"center", {o.center.x, o.center.y, o.center.z}},
                        {"extents", {o.extents.x, o.extents.y, o.extents.z}}});
    }
    j["objects"] = std::move(objs);
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    scene.seed = j.at("seed").get<std::uint64_t>();
    scene.size_cut = j.value("size_cut", 0.5);
    const auto& cam = j.at("camera");
    scene.camera.focal_px = cam.at("focal_px").get<double>();
    scene.camera.principal_u = cam.at("principal").at(0).get<double>();
    scene.camera.principal_v = cam.at("principal").at(1).get<double>();
    scene.camera.image_width = cam.at("image_size").at(0).get<int>();
    scene.camera.image_height = cam.at("image_size").at(1).get<int>();
    for (const auto& jo : j.at("objects")) {
        Object3D o;
        o.id = jo.at("id").get<int>();
        o.shape = shape_from_word(jo.at("shape").get<std::string>());
        o.color = color_from_word(jo.at("color").get<std::string>());
        o.material = material_from_word(jo.at("material").get<std::string>());
        o.size_class = size_class_from_word(jo.at("size_class").get<std::string>());
        o.center = {jo.at("center").at(0).get<double>(), jo.at("center").at(1).get<double>(),
                    jo.at("center").at(2).get<double>()};
        o.extents = {jo.at("extents").at(0).get<double>(), jo.at("extents").at(1).get<double>(),
                     jo.at("extents").at(2).get<double>()};
        scene.objects.push_back(o);
    }
    validate_scene(scene);
    return scene;
}

Scene read_scene(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scene file: " + file.string());
    nlohmann::json j;
    in >> j;
    return scene_from_json(j);
}

void write_scene(const Scene& scene, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write scene file: " + file.string());
    out << scene_to_json(scene).dump(2) << '\n';
}

} // namespace progsyn
