#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "progsyn/scene.hpp"

#include "helpers.hpp"

using namespace progsyn;
using namespace progsyn::testing;

TEST_CASE("project_center: pinhole arithmetic") {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->objects = {
        make_object(0, Shape::cube, Color::red, Material::rubber, SizeClass::small,
                    {0.0, 0.0, 5.0}, {0.3, 0.3, 0.3}),
        make_object(1, Shape::cube, Color::blue, Material::rubber, SizeClass::small,
                    {1.0, 0.0, 5.0}, {0.3, 0.3, 0.3}),
        make_object(2, Shape::cube, Color::green, Material::rubber, SizeClass::small,
                    {0.0, -1.0, 4.0}, {0.3, 0.3, 0.3}),
    };
    validate_scene(*scene);

    // on the optical axis
    PixelPoint p0 = project_center(*scene, 0);
    CHECK(p0.u == 160.0);
    CHECK(p0.v == 120.0);
    // 100 * 1/5 + 160
    PixelPoint p1 = project_center(*scene, 1);
    CHECK(p1.u == doctest::Approx(180.0));
    CHECK(p1.v == doctest::Approx(120.0));
    // 100 * (-1)/4 + 120
    PixelPoint p2 = project_center(*scene, 2);
    CHECK(p2.u == doctest::Approx(160.0));
    CHECK(p2.v == doctest::Approx(95.0));

    CHECK_THROWS_AS(project_center(*scene, 99), UnknownObjectError);
}

TEST_CASE("project_bbox: corner hull of a unit cube at z=5") {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->objects = {
        make_object(0, Shape::cube, Color::red, Material::rubber, SizeClass::large,
                    {0.0, 0.0, 5.0}, {1.0, 1.0, 1.0}),
        make_object(1, Shape::cube, Color::blue, Material::rubber, SizeClass::small,
                    {1.2, 0.8, 6.0}, {0.3, 0.3, 0.3}),
    };
    validate_scene(*scene);

    // near face at z=4.5 dominates the hull: half-width 100*0.5/4.5
    PixelBox box = project_bbox(*scene, 0);
    double half = 100.0 * 0.5 / 4.5;
    CHECK(box.x_min == doctest::Approx(160.0 - half).epsilon(1e-12));
    CHECK(box.x_max == doctest::Approx(160.0 + half).epsilon(1e-12));
    CHECK(box.width() == doctest::Approx(200.0 / 9.0).epsilon(1e-12));
    CHECK(box.height() == doctest::Approx(200.0 / 9.0).epsilon(1e-12));

    // hull contains the projected center
    PixelPoint c = project_center(*scene, 0);
    CHECK(box.x_min < c.u);
    CHECK(c.u < box.x_max);
    CHECK(box.y_min < c.v);
    CHECK(c.v < box.y_max);

    CHECK_THROWS_AS(project_bbox(*scene, -1), UnknownObjectError);
}

TEST_CASE("camera invariants rejected at validation") {
    Scene scene = *scene_t1();
    scene.camera.focal_px = 0.0;
    CHECK_THROWS_AS(validate_scene(scene), SceneInvariantError);
    scene.camera = fixture_camera();
    scene.camera.principal_u = 9999.0;
    CHECK_THROWS_AS(validate_scene(scene), SceneInvariantError);
}

TEST_CASE("ground_truth_depth is camera-frame z, not Euclidean distance") {
    auto scene = std::make_shared<Scene>();
    scene->camera = fixture_camera();
    scene->objects = {
        make_object(0, Shape::cube, Color::red, Material::rubber, SizeClass::small,
                    {0.0, 0.0, 5.0}, {0.3, 0.3, 0.3}),
        make_object(1, Shape::cube, Color::blue, Material::rubber, SizeClass::small,
                    {3.0, 0.0, 4.0}, {0.3, 0.3, 0.3}),
    };
    // object 1 projects far right; widen the camera so it stays in frame
    scene->camera.focal_px = 50.0;
    validate_scene(*scene);

    CHECK(ground_truth_depth(*scene, 0) == 5.0);
    CHECK(ground_truth_depth(*scene, 1) == 4.0);  // not sqrt(9 + 16) = 5
    // depth ordering: object 1 is in front
    CHECK(ground_truth_depth(*scene, 1) < ground_truth_depth(*scene, 0));
}

TEST_CASE("generate_scene: determinism and invariants") {
    Camera camera;  // defaults
    Scene a = generate_scene(0, 4, camera);
    Scene b = generate_scene(0, 4, camera);
    CHECK(scene_to_json(a).dump() == scene_to_json(b).dump());

    Scene c = generate_scene(1, 4, camera);
    CHECK(scene_to_json(a).dump() != scene_to_json(c).dump());

    CHECK_THROWS_AS(generate_scene(0, 11, camera), OutOfRangeError);
    CHECK_THROWS_AS(generate_scene(0, 1, camera), OutOfRangeError);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Scene s = generate_scene(seed, 2 + static_cast<int>(seed % 9), camera);
        validate_scene(s);  // margin, ids, projections
        // every projected center strictly inside every object's own bbox
        for (const Object3D& o : s.objects) {
            PixelPoint p = project_center(s, o.id);
            PixelBox box = project_bbox(s, o.id);
            CHECK(box.x_min < p.u);
            CHECK(p.u < box.x_max);
            CHECK(box.y_min < p.v);
            CHECK(p.v < box.y_max);
        }
    }
}

TEST_CASE("generate_scene: an unsatisfiable margin fails after bounded draws") {
    // a 4x4 px image cannot hold two centers 12 px apart
    Camera tiny;
    tiny.image_width = 4;
    tiny.image_height = 4;
    tiny.principal_u = 2;
    tiny.principal_v = 2;
    CHECK_THROWS_AS(generate_scene(0, 3, tiny), PlacementFailureError);
}

TEST_CASE("scene file round-trip is byte-identical") {
    auto dir = fresh_tmp_dir("scene_roundtrip");
    Scene scene = generate_scene(7, 5, Camera{});
    write_scene(scene, dir / "a.json");
    Scene loaded = read_scene(dir / "a.json");
    write_scene(loaded, dir / "b.json");

    std::ifstream fa(dir / "a.json"), fb(dir / "b.json");
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
}

TEST_CASE("depth ordering is stable across runs for a fixed seed") {
    Scene a = generate_scene(123, 6, Camera{});
    Scene b = generate_scene(123, 6, Camera{});
    std::vector<int> order_a, order_b;
    for (const Object3D& o : a.objects) order_a.push_back(o.id);
    for (const Object3D& o : b.objects) order_b.push_back(o.id);
    std::stable_sort(order_a.begin(), order_a.end(), [&](int x, int y) {
        return ground_truth_depth(a, x) < ground_truth_depth(a, y);
    });
    std::stable_sort(order_b.begin(), order_b.end(), [&](int x, int y) {
        return ground_truth_depth(b, x) < ground_truth_depth(b, y);
    });
    CHECK(order_a == order_b);
}
