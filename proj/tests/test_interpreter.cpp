#include <doctest.h>

#include "progsyn/interpreter.hpp"
#include "progsyn/registry.hpp"

#include "helpers.hpp"

using namespace progsyn;
using namespace progsyn::testing;

namespace {

Value run(const std::string& source, const SpecialistSuite& suite,
          const MethodResolver* registry = nullptr, const Limits& limits = {}) {
    Program program = parse_program(source);
    return execute_program(program, registry, suite, limits).final_result;
}

Value run_t1(const std::string& source) {
    SpecialistSuite suite = oracle_suite(scene_t1());
    return run(source, suite);
}

RuntimeError error_of(const std::string& source, const SpecialistSuite& suite) {
    try {
        run(source, suite);
    } catch (const RuntimeError& e) {
        return e;
    }
    FAIL("expected a RuntimeError");
    return RuntimeError(ErrorKind::SyntaxError, 0, "unreachable");
}

Value call_body(const std::string& body_text, const std::vector<std::string>& params,
                const std::vector<Value>& args, const SpecialistSuite& suite) {
    MethodBody body = parse_method_body(body_text, params);
    return call_method_with_values(body, args, nullptr, suite);
}

} // namespace

TEST_CASE("parse_program: basics and syntax errors") {
    CHECK(parse_program("final_result = 1 + 2").body.size() == 1);
    CHECK_THROWS_AS(parse_program("for x in"), RuntimeError);
    CHECK_THROWS_AS(parse_program(""), RuntimeError);
    CHECK_THROWS_AS(parse_program("x = {1: 2}"), RuntimeError);      // dictionaries unsupported
    CHECK_THROWS_AS(parse_program("import os"), RuntimeError);      // no import statement exists
    CHECK_THROWS_AS(parse_program("x = a < b < c"), RuntimeError);  // chained comparison
    CHECK_THROWS_AS(parse_program("return 1"), RuntimeError);       // return outside a method
    CHECK_THROWS_AS(parse_program("x.pop()"), RuntimeError);        // only .append is a method
    CHECK_THROWS_AS(parse_program("x[0] = 1"), RuntimeError);       // no index assignment

    try {
        parse_program("x = 1\nfor q in\ny = 2");
    } catch (const RuntimeError& e) {
        CHECK(e.kind == ErrorKind::SyntaxError);
        CHECK(e.line == 2);
        CHECK(e.render().rfind("SyntaxError at line 2:", 0) == 0);
    }
}

TEST_CASE("parse_method_body: params, returns, nested defs") {
    CHECK_NOTHROW(parse_method_body("return material", {"material"}));
    CHECK_THROWS_AS(parse_method_body("def f():\n    return 1", {}), RuntimeError);
    CHECK_THROWS_AS(parse_method_body("return 1", {"not a name"}), RuntimeError);
}

TEST_CASE("arithmetic, comparison, and boolean semantics") {
    SpecialistSuite suite = oracle_suite(scene_t2());
    CHECK(run("final_result = 1 + 2", suite).as_int() == 3);
    CHECK(run("final_result = 7 * 6 - 2", suite).as_int() == 40);
    CHECK(run("final_result = 1 / 2", suite).as_real() == 0.5);  // / always yields a real
    CHECK(run("final_result = 3.0 * 2", suite).as_real() == 6.0);
    CHECK(run("final_result = -4", suite).as_int() == -4);
    CHECK(run("final_result = 'a' + 'b'", suite).as_string() == "ab");
    CHECK(run("final_result = 1 < 2", suite).as_bool());
    CHECK(run("final_result = 2 == 2.0", suite).as_bool());
    CHECK(run("final_result = 'x' != 'y'", suite).as_bool());
    CHECK(run("final_result = not []", suite).as_bool());
    CHECK(run("final_result = 1 < 2 and 3 < 4", suite).as_bool());
    CHECK(run("final_result = [] or [1]", suite).as_bool());
    CHECK(run("final_result = len('abc') + len([1, 2])", suite).as_int() == 5);
    CHECK(run("final_result = min(3, 1, 2)", suite).as_int() == 1);
    CHECK(run("final_result = max([3, 1, 2])", suite).as_int() == 3);
    CHECK(run("final_result = abs(0 - 2.5)", suite).as_real() == 2.5);
    CHECK(run("xs = [1, 2, 3]\nfinal_result = xs[-1]", suite).as_int() == 3);
}

TEST_CASE("runtime error taxonomy") {
    SpecialistSuite suite = oracle_suite(scene_t2());
    CHECK(error_of("final_result = 1 / 0", suite).kind == ErrorKind::DivisionByZero);
    CHECK(error_of("final_result = 1 / (2 - 2.0)", suite).kind == ErrorKind::DivisionByZero);
    CHECK(error_of("final_result = missing", suite).kind == ErrorKind::UndefinedVariable);
    CHECK(error_of("final_result = _nope(1)", suite).kind == ErrorKind::UndefinedMethod);
    CHECK(error_of("final_result = _nope(1)", suite).detail == "_nope");
    CHECK(error_of("final_result = 1 + 'a'", suite).kind == ErrorKind::TypeMismatch);
    CHECK(error_of("xs = [1]\nfinal_result = xs[4]", suite).kind == ErrorKind::IndexOutOfRange);
    CHECK(error_of("x = 1", suite).kind == ErrorKind::MissingFinalResult);
    CHECK(error_of("final_result = len(1, 2)", suite).kind == ErrorKind::ArgumentCount);
    CHECK(error_of("final_result = vqa(image, 'weather?', 140, 112.5)", suite).kind ==
          ErrorKind::UnsupportedQuestion);
    CHECK(error_of("final_result = depth(image, 0, 0)", suite).kind == ErrorKind::NoObjectAtPoint);

    // every error message renders on one line, with the offending line number
    RuntimeError e = error_of("x = 1\ny = x / 0", suite);
    CHECK(e.line == 2);
    CHECK(e.render() == "DivisionByZero at line 2: division by zero");
    CHECK(e.render().find('\n') == std::string::npos);
}

TEST_CASE("step limit and call depth") {
    SpecialistSuite suite = oracle_suite(scene_t2());
    Limits tight;
    tight.max_steps = 100;
    Program program = parse_program("i = 0\nwhile i < 10000:\n    i = i + 1\nfinal_result = i");
    CHECK_THROWS_AS(execute_program(program, nullptr, suite, tight), RuntimeError);
    try {
        execute_program(program, nullptr, suite, tight);
    } catch (const RuntimeError& e) {
        CHECK(e.kind == ErrorKind::StepLimitExceeded);
    }

    // straight-line step accounting stays linear: n statements, small constant
    std::string straight;
    for (int i = 0; i < 50; ++i) straight += "v" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    straight += "final_result = v0\n";
    Program linear = parse_program(straight);
    ExecutionResult result = execute_program(linear, nullptr, suite);
    CHECK(result.trace.steps <= 10 * 51);
}

TEST_CASE("runaway recursion through a registry method hits the depth limit") {
    nlohmann::json snapshot = {
        {"generated",
         {{{"name", "_spin"},
           {"docstring", "\"\"\"calls itself\"\"\""},
           {"params", {{{"name", "image"}, {"type", "image"}}}},
           {"body_text", "return _spin(image)\n"},
           {"status", "implemented"},
           {"error_count", 0}}}}};
    ApiRegistry registry = ApiRegistry::from_snapshot(snapshot, ApiProfile::clevr);
    SpecialistSuite suite = oracle_suite(scene_t1());
    Program program = parse_program("final_result = _spin(image)");
    try {
        execute_program(program, &registry, suite);
        FAIL("expected StepLimitExceeded");
    } catch (const RuntimeError& e) {
        CHECK(e.kind == ErrorKind::StepLimitExceeded);
        CHECK(e.message.find("depth") != std::string::npos);
    }
}

TEST_CASE("trace records lines and ends at the error line") {
    SpecialistSuite suite = oracle_suite(scene_t2());
    Program program = parse_program("x = 3\ny = x * 2\nz = y / 0\nfinal_result = z");
    try {
        execute_program(program, nullptr, suite);
        FAIL("expected DivisionByZero");
    } catch (const RuntimeError& e) {
        CHECK(e.line == 3);
    }
    // re-run to inspect the successful prefix of a fixed program
    Program ok = parse_program("x = 3\ny = x * 2\nfinal_result = y");
    ExecutionResult result = execute_program(ok, nullptr, suite);
    REQUIRE(result.trace.entries.size() >= 3);
    CHECK(result.trace.entries[0].line == 1);
    CHECK(result.trace.entries[0].note == "x = 3");
    CHECK(result.trace.entries[1].note == "y = 6");
    CHECK(result.final_result.as_int() == 6);
}

TEST_CASE("determinism: identical runs produce identical values and traces") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    std::string source =
        "pts = loc(image, 'objects')\n"
        "total = 0.0\n"
        "for p in pts:\n"
        "    x, y = p\n"
        "    total = total + depth(image, x, y)\n"
        "final_result = total\n";
    Program program = parse_program(source);
    ExecutionResult a = execute_program(program, nullptr, suite);
    ExecutionResult b = execute_program(program, nullptr, suite);
    CHECK(a.final_result.equals(b.final_result));
    REQUIRE(a.trace.entries.size() == b.trace.entries.size());
    for (std::size_t i = 0; i < a.trace.entries.size(); ++i) {
        CHECK(a.trace.entries[i].line == b.trace.entries[i].line);
        CHECK(a.trace.entries[i].note == b.trace.entries[i].note);
    }
    CHECK(a.final_result.as_real() == 17.0);  // 5 + 4 + 8
}

// ---------------------------------------------------------------------------
// fixture corpus: the shipped method bodies, traced by hand on fixed scenes
// ---------------------------------------------------------------------------

static const char* kObjectsLeftBody =
    "objects_left = []\n"
    "all_objects = loc(image, object_prompt='objects')\n"
    "for object_point in all_objects:\n"
    "    x, y = object_point\n"
    "    if same_object(image, ref_x, ref_y, x, y):\n"
    "        continue\n"
    "    if x < ref_x:\n"
    "        objects_left.append(object_point)\n"
    "return objects_left\n";

TEST_CASE("corpus: objects_left") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    Value image = Value::image({&suite});
    // reference is the cube at (160,120); only the sphere at (135,132.5) is left of it
    Value result = call_body(kObjectsLeftBody, {"image", "ref_x", "ref_y"},
                             {image, Value::integer(160), Value::integer(120)}, suite);
    REQUIRE(result.kind() == Value::Kind::list);
    REQUIRE(result.sequence_items().size() == 1);
    const Value& point = result.sequence_items()[0];
    CHECK(point.sequence_items()[0].as_real() == doctest::Approx(135.0));
    CHECK(point.sequence_items()[1].as_real() == doctest::Approx(132.5));

    // reference far left: nothing qualifies
    Value none = call_body(kObjectsLeftBody, {"image", "ref_x", "ref_y"},
                           {image, Value::integer(135), Value::real(132.5)}, suite);
    CHECK(none.sequence_items().empty());
}

static const char* kInFrontOfBody =
    "depth_1 = depth(image, x_1, y_1)\n"
    "depth_2 = depth(image, x_2, y_2)\n"
    "return depth_1 < depth_2\n";

TEST_CASE("corpus: in_front_of") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    Value image = Value::image({&suite});
    // sphere (z=4) is in front of cube (z=5)
    Value front = call_body(kInFrontOfBody, {"image", "x_1", "y_1", "x_2", "y_2"},
                            {image, Value::integer(135), Value::real(132.5), Value::integer(160),
                             Value::integer(120)},
                            suite);
    CHECK(front.as_bool());
    Value behind = call_body(kInFrontOfBody, {"image", "x_1", "y_1", "x_2", "y_2"},
                             {image, Value::integer(175), Value::integer(115), Value::integer(160),
                              Value::integer(120)},
                             suite);
    CHECK_FALSE(behind.as_bool());
}

static const char* kObjectMaterialBody =
    "material = vqa(image=image, question='What material is this object?', x=ref_x, y=ref_y)\n"
    "return material\n";

TEST_CASE("corpus: object_material with keyword arguments") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    Value image = Value::image({&suite});
    Value metal = call_body(kObjectMaterialBody, {"image", "ref_x", "ref_y"},
                            {image, Value::real(135.0), Value::real(132.5)}, suite);
    CHECK(metal.as_string() == "metal");
    Value rubber = call_body(kObjectMaterialBody, {"image", "ref_x", "ref_y"},
                             {image, Value::integer(160), Value::integer(120)}, suite);
    CHECK(rubber.as_string() == "rubber");
}

static const char* kSameSizeClevrBody =
    "object_1_size = vqa(image=image, question='What size is this object?', x=x_1, y=y_1)\n"
    "object_2_size = vqa(image=image, question='What size is this object?', x=x_2, y=y_2)\n"
    "return object_1_size == object_2_size\n";

TEST_CASE("corpus: same_size, size-class route") {
    SpecialistSuite t2 = oracle_suite(scene_t2());
    Value image2 = Value::image({&t2});
    // both spheres are small
    Value same = call_body(kSameSizeClevrBody, {"image", "x_1", "y_1", "x_2", "y_2"},
                           {image2, Value::integer(140), Value::real(112.5), Value::integer(175),
                            Value::integer(125)},
                           t2);
    CHECK(same.as_bool());

    SpecialistSuite t1 = oracle_suite(scene_t1());
    Value image1 = Value::image({&t1});
    // small cube vs large sphere
    Value differ = call_body(kSameSizeClevrBody, {"image", "x_1", "y_1", "x_2", "y_2"},
                             {image1, Value::integer(160), Value::integer(120),
                              Value::integer(135), Value::real(132.5)},
                             t1);
    CHECK_FALSE(differ.as_bool());
}

// the shipped image-space variant misspells its epsilon parameter; running
// it verbatim must surface exactly that name
static const char* kSameSizeOmniVerbatim =
    "object_1_height, object_1_width = get_2D_object_size(image, x_1, y_1)\n"
    "object_2_height, object_2_width = get_2D_object_size(image, x_2, y_2)\n"
    "return abs(object_1_height - object_2_height) < epislon and abs(object_1_width - "
    "object_2_width) < epsilon\n";

TEST_CASE("corpus: same_size image-space variant, verbatim typo") {
    SpecialistSuite suite = oracle_suite(scene_t2());
    Value image = Value::image({&suite});
    MethodBody body = parse_method_body(kSameSizeOmniVerbatim,
                                        {"image", "x_1", "y_1", "x_2", "y_2", "epsilon"});
    try {
        call_method_with_values(body,
                                {image, Value::integer(140), Value::real(112.5),
                                 Value::integer(175), Value::integer(125), Value::real(5.0)},
                                nullptr, suite);
        FAIL("expected UndefinedVariable");
    } catch (const RuntimeError& e) {
        CHECK(e.kind == ErrorKind::UndefinedVariable);
        CHECK(e.detail == "epislon");
        CHECK(e.line == 3);
    }
}

static const char* kSameSizeOmniFixed =
    "object_1_height, object_1_width = get_2D_object_size(image, x_1, y_1)\n"
    "object_2_height, object_2_width = get_2D_object_size(image, x_2, y_2)\n"
    "return abs(object_1_height - object_2_height) < epsilon and abs(object_1_width - "
    "object_2_width) < epsilon\n";

TEST_CASE("corpus: same_size image-space variant, corrected") {
    auto scene = scene_t2();
    SpecialistSuite suite = oracle_suite(scene);
    Value image = Value::image({&suite});
    auto args = [&](double eps) {
        return std::vector<Value>{image,
                                  Value::integer(140), Value::real(112.5),
                                  Value::integer(175), Value::integer(125),
                                  Value::real(eps)};
    };
    // expected from the projection oracle directly
    PixelBox b0 = project_bbox(*scene, 0);
    PixelBox b1 = project_bbox(*scene, 1);
    double dw = std::abs(b0.width() - b1.width());
    double dh = std::abs(b0.height() - b1.height());
    bool close = dh < 5.0 && dw < 5.0;
    Value got = call_body(kSameSizeOmniFixed, {"image", "x_1", "y_1", "x_2", "y_2", "epsilon"},
                          args(5.0), suite);
    CHECK(got.as_bool() == close);
    // a tiny epsilon separates different-depth twins
    Value strict = call_body(kSameSizeOmniFixed, {"image", "x_1", "y_1", "x_2", "y_2", "epsilon"},
                             args(1e-9), suite);
    CHECK_FALSE(strict.as_bool());
}

static const char* kGetObjectListVerbatim =
    "objects = []\n"
    "object_points = loc(image, object_prompt='objects')\n"
    "for object_point in object_coords:\n"
    "    obj_x, obj_y = object_point\n"
    "    objects.append(vqa(image, \"What is this object?\", obj_x, obj_y))\n"
    "return objects\n";

TEST_CASE("corpus: get_object_list verbatim iterates a misspelled name") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    Value image = Value::image({&suite});
    MethodBody body = parse_method_body(kGetObjectListVerbatim, {"image"});
    try {
        call_method_with_values(body, {image}, nullptr, suite);
        FAIL("expected UndefinedVariable");
    } catch (const RuntimeError& e) {
        CHECK(e.kind == ErrorKind::UndefinedVariable);
        CHECK(e.detail == "object_coords");
        CHECK(e.line == 3);
    }
}

static const char* kGetObjectListFixed =
    "objects = []\n"
    "object_points = loc(image, object_prompt='objects')\n"
    "for object_point in object_points:\n"
    "    obj_x, obj_y = object_point\n"
    "    objects.append(vqa(image, \"What is this object?\", obj_x, obj_y))\n"
    "return objects\n";

TEST_CASE("corpus: get_object_list corrected") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    Value image = Value::image({&suite});
    Value result = call_body(kGetObjectListFixed, {"image"}, {image}, suite);
    REQUIRE(result.kind() == Value::Kind::list);
    const Value::List& items = result.sequence_items();
    REQUIRE(items.size() == 3);
    // loc orders by u: sphere (135), cube (160), cylinder (175)
    CHECK(items[0].as_string() == "sphere");
    CHECK(items[1].as_string() == "cube");
    CHECK(items[2].as_string() == "cylinder");
}

// ---------------------------------------------------------------------------
// full program fixtures
// ---------------------------------------------------------------------------

TEST_CASE("program: shape of the rubber object in front of the green cylinder") {
    std::string source =
        "cylinders = loc(image, 'cylinders')\n"
        "target_x = 0\n"
        "target_y = 0\n"
        "found = 0\n"
        "for p in cylinders:\n"
        "    x, y = p\n"
        "    c = vqa(image, 'What color is this object?', x, y)\n"
        "    if c == 'green':\n"
        "        target_x = x\n"
        "        target_y = y\n"
        "        found = 1\n"
        "result = 'none'\n"
        "if found == 1:\n"
        "    d_ref = depth(image, target_x, target_y)\n"
        "    all_pts = loc(image, 'objects')\n"
        "    for p in all_pts:\n"
        "        x, y = p\n"
        "        if same_object(image, x, y, target_x, target_y):\n"
        "            continue\n"
        "        m = vqa(image, 'What material is this object?', x, y)\n"
        "        if m == 'rubber':\n"
        "            d = depth(image, x, y)\n"
        "            if d < d_ref:\n"
        "                result = vqa(image, 'What shape is this object?', x, y)\n"
        "final_result = result\n";
    // hand trace on T1: green cylinder at depth 8; rubber objects in front: the cube (z=5)
    CHECK(run_t1(source).as_string() == "cube");
}

TEST_CASE("program: count objects sharing the purple cylinder's material") {
    std::string source =
        "cylinders = loc(image, 'cylinders')\n"
        "ref_x = 0\n"
        "ref_y = 0\n"
        "found = 0\n"
        "for p in cylinders:\n"
        "    x, y = p\n"
        "    c = vqa(image, 'What color is this object?', x, y)\n"
        "    if c == 'purple':\n"
        "        ref_x = x\n"
        "        ref_y = y\n"
        "        found = 1\n"
        "count = 0\n"
        "if found == 1:\n"
        "    ref_material = vqa(image, 'What material is this object?', ref_x, ref_y)\n"
        "    all_pts = loc(image, 'objects')\n"
        "    for p in all_pts:\n"
        "        x, y = p\n"
        "        if same_object(image, x, y, ref_x, ref_y):\n"
        "            continue\n"
        "        m = vqa(image, 'What material is this object?', x, y)\n"
        "        if m == ref_material:\n"
        "            count = count + 1\n"
        "final_result = count\n";
    // T3: purple cylinder is metal; the only other metal object is the red cube
    SpecialistSuite suite = oracle_suite(scene_t3());
    CHECK(run(source, suite).as_int() == 1);
}

TEST_CASE("program: while with break and continue") {
    std::string source =
        "i = 0\n"
        "total = 0\n"
        "while True:\n"
        "    i = i + 1\n"
        "    if i == 3:\n"
        "        continue\n"
        "    if i > 6:\n"
        "        break\n"
        "    total = total + i\n"
        "final_result = total\n";
    // 1 + 2 + 4 + 5 + 6
    CHECK(run_t1(source).as_int() == 18);
}

TEST_CASE("program: builtins and arithmetic mix") {
    std::string source =
        "xs = [3, 1, 4, 1, 5]\n"
        "m = max(xs)\n"
        "n = min(xs)\n"
        "a = abs(0 - m)\n"
        "l = len(xs)\n"
        "avg = (3 + 1 + 4 + 1 + 5) / l\n"
        "final_result = a + n + avg\n";
    CHECK(run_t1(source).as_real() == doctest::Approx(8.8));
}

TEST_CASE("program: nested loops, tuple building, indexing") {
    std::string source =
        "pairs = []\n"
        "for a in [1, 2, 3]:\n"
        "    for b in [10, 20]:\n"
        "        pairs.append((a, b))\n"
        "s = 0\n"
        "for p in pairs:\n"
        "    x, y = p\n"
        "    s = s + x * y\n"
        "first = pairs[0]\n"
        "final_result = s + first[1]\n";
    CHECK(run_t1(source).as_int() == 190);
}

TEST_CASE("program: string concatenation feeds a specialist prompt") {
    std::string source =
        "name = 'cyl' + 'inders'\n"
        "pts = loc(image, object_prompt=name)\n"
        "final_result = len(pts)\n";
    CHECK(run_t1(source).as_int() == 1);
}

TEST_CASE("sandbox: only specialists, registry methods, and builtins resolve") {
    SpecialistSuite suite = oracle_suite(scene_t1());
    for (const char* attempt : {"final_result = open('/etc/passwd')",
                                "final_result = eval('1')",
                                 "final_result = print(1)",
                                "final_result = range(3)"}) {
        RuntimeError e = error_of(attempt, suite);
        CHECK(e.kind == ErrorKind::UndefinedMethod);
    }
}

TEST_CASE("image handle is opaque: no attribute access parses") {
    CHECK_THROWS_AS(parse_program("final_result = image.scene"), RuntimeError);
    CHECK_THROWS_AS(parse_program("final_result = image.objects()"), RuntimeError);
}
