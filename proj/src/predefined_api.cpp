#include "progsyn/predefined_api.hpp"

#include <stdexcept>

namespace progsyn {

std::string_view to_word(ApiProfile p) {
    return p == ApiProfile::clevr ? "clevr" : "omni3d";
}

ApiProfile profile_from_word(std::string_view w) {
    if (w == "clevr") return ApiProfile::clevr;
    if (w == "omni3d") return ApiProfile::omni3d;
    throw std::invalid_argument("unknown profile: " + std::string(w));
}

namespace {

const char* kLocClevr = R"("""
Locates objects in an image. Object prompts should be 1 WORD MAX.

Args:
    image (image): Image to search.
    object_prompt (string): Description of object to locate. Examples: "spheres", "objects".
Returns:
    list: A list of x,y coordinates for all of the objects located in pixel space.
""")";

const char* kLocOmni = R"("""
Locates objects in an image. Object prompts should be 1 WORD MAX.

Args:
    image (image): Image to search.
    object_prompt (string): Description of object to locate.
Returns:
    list: A list of x,y coordinates for all of the objects located in pixel space.
""")";

const char* kVqa = R"("""
Answers a question about the attributes of an object specified by an x,y coordinate.
Should not be used for other kinds of questions.

Args:
    image (image): Image of the scene.
    question (string): Question about the objects attribute to answer. Examples: "What color is this?", "What material is this?"
    x (int): X coordinate of the object in pixel space.
    y (int): Y coordinate of the object in pixel space.

Returns:
    string: Answer to the question about the object in the image.
""")";

const char* kDepth = R"("""
Returns the depth of an object specified by an x,y coordinate.

Args:
    image (image): Image of the scene.
    x (int): X coordinate of the object in pixel space.
    y (int): Y coordinate of the object in pixel space.

Returns:
    float: The depth of the object specified by the coordinates.
""")";

const char* kSameObject = R"("""
Checks if two pairs of coordinates correspond to the same object.

Args:
    image (image): Image of the scene.
    x_1 (int): X coordinate of object 1 in pixel space.
    y_1 (int): Y coordinate of object 1 in pixel space.
    x_2 (int): X coordinate of object 2 in pixel space.
    y_2 (int): Y coordinate of object 2 in pixel space.

Returns:
    bool: True if object 1 is the same object as object 2, False otherwise.
""")";

const char* kSize2D = R"("""
Returns the width and height of the object in 2D pixel space.

Args:
    image (image): Image of the scene.
    x (int): X coordinate of the object in pixel space.
    y (int): Y coordinate of the object in pixel space.

Returns:
    tuple: (width, height) of the object in 2D pixel space.
""")";

} // namespace

const std::vector<PredefinedModule>& predefined_modules() {
    static const std::vector<PredefinedModule> modules = {
        {"loc", {"image", "object_prompt"}, kLocClevr, kLocOmni},
        {"vqa", {"image", "question", "x", "y"}, kVqa, kVqa},
        {"depth", {"image", "x", "y"}, kDepth, kDepth},
        {"same_object", {"image", "x_1", "y_1", "x_2", "y_2"}, kSameObject, kSameObject},
        {"get_2D_object_size", {"image", "x", "y"}, "", kSize2D},
    };
    return modules;
}

bool is_predefined_name(std::string_view name) {
    for (const PredefinedModule& m : predefined_modules())
        if (name == m.name) return true;
    return false;
}

std::string render_predefined_docstrings(ApiProfile profile) {
    std::string out;
    bool first = true;
    for (const PredefinedModule& m : predefined_modules()) {
        const std::string& doc =
            profile == ApiProfile::clevr ? m.docstring_clevr : m.docstring_omni3d;
        if (doc.empty()) continue;
        if (!first) out += "\n";
        first = false;
        out += doc;
        out += "\ndef " + m.name + "(";
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (i) out += ", ";
            out += m.params[i];
        }
        out += "):\n";
    }
    return out;
}

} // namespace progsyn
