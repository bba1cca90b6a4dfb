#pragma once

#include <filesystem>
#include <memory>

#include "progsyn/agents.hpp"
#include "progsyn/scene.hpp"
#include "progsyn/specialists.hpp"

namespace progsyn::testing {

// Three fixed scenes with hand-checkable numbers. All use a 320x240 image,
// focal 100 px, principal point (160, 120).
inline Camera fixture_camera() { return Camera{100.0, 160.0, 120.0, 320, 240}; }

inline Object3D make_object(int id, Shape s, Color c, Material m, SizeClass z, Vec3 center,
                            Vec3 extents) {
    Object3D o;
    o.id = id;
    o.shape = s;
    o.color = c;
    o.material = m;
    o.size_class = z;
    o.center = center;
    o.extents = extents;
    return o;
}

// centers project to (160,120), (135,132.5), (175,115)
inline std::shared_ptr<const Scene> scene_t1() {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->seed = 9001;
    scene->objects = {
        make_object(0, Shape::cube, Color::red, Material::rubber, SizeClass::small,
                    {0.0, 0.0, 5.0}, {0.4, 0.4, 0.4}),
        make_object(1, Shape::sphere, Color::blue, Material::metal, SizeClass::large,
                    {-1.0, 0.5, 4.0}, {0.8, 0.8, 0.8}),
        make_object(2, Shape::cylinder, Color::green, Material::rubber, SizeClass::large,
                    {1.2, -0.4, 8.0}, {0.7, 1.0, 0.7}),
    };
    validate_scene(*scene);
    return scene;
}

// two small yellow spheres at different depths: (140,112.5) and (175,125)
inline std::shared_ptr<const Scene> scene_t2() {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->seed = 9002;
    scene->objects = {
        make_object(0, Shape::sphere, Color::yellow, Material::metal, SizeClass::small,
                    {-0.8, -0.3, 4.0}, {0.3, 0.3, 0.3}),
        make_object(1, Shape::sphere, Color::yellow, Material::rubber, SizeClass::small,
                    {0.9, 0.3, 6.0}, {0.3, 0.3, 0.3}),
    };
    validate_scene(*scene);
    return scene;
}

// four objects: centers (130,120), (156,125), (176,110), (170,140)
inline std::shared_ptr<const Scene> scene_t3() {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->seed = 9003;
    scene->objects = {
        make_object(0, Shape::cube, Color::gray, Material::rubber, SizeClass::small,
                    {-1.5, 0.0, 5.0}, {0.35, 0.35, 0.35}),
        make_object(1, Shape::cube, Color::red, Material::metal, SizeClass::large,
                    {-0.2, 0.25, 5.0}, {0.9, 0.9, 0.9}),
        make_object(2, Shape::sphere, Color::red, Material::rubber, SizeClass::small,
                    {0.8, -0.5, 5.0}, {0.25, 0.25, 0.25}),
        make_object(3, Shape::cylinder, Color::purple, Material::metal, SizeClass::large,
                    {0.3, 0.6, 3.0}, {0.6, 1.0, 0.6}),
    };
    validate_scene(*scene);
    return scene;
}

inline SpecialistSuite oracle_suite(std::shared_ptr<const Scene> scene) {
    return SpecialistSuite(std::move(scene), SuiteOptions{});
}

inline const TemplateLibrary& templates() {
    static const TemplateLibrary lib = TemplateLibrary::load(PROGSYN_TEMPLATE_DIR);
    return lib;
}

inline std::filesystem::path fresh_tmp_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::path(PROGSYN_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace progsyn::testing
