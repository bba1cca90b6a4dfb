#include "progsyn/specialists.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "progsyn/rng.hpp"

namespace progsyn {

namespace {

std::string normalize_prompt(std::string_view raw) {
    std::string out;
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (c == ' ' || c == '_')
            out.push_back(' ');
    }
    // trim
    auto b = out.find_first_not_of(' ');
    if (b == std::string::npos) return "";
    auto e = out.find_last_not_of(' ');
    return out.substr(b, e - b + 1);
}

std::string strip_plural(std::string w) {
    if (w.size() > 1 && w.back() == 's') w.pop_back();
    return w;
}

std::optional<Shape> shape_for_prompt(const std::string& word) {
    std::string w = strip_plural(word);
    if (w == "cube" || w == "square") return Shape::cube;
    if (w == "sphere") return Shape::sphere;
    if (w == "cylinder") return Shape::cylinder;
    return std::nullopt;
}

bool contains_word(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

} // namespace

SpecialistSuite::SpecialistSuite(std::shared_ptr<const Scene> scene, SuiteOptions options)
    : scene_(std::move(scene)), options_(options) {
    if (!scene_) throw std::invalid_argument("suite requires a scene");
    if (options_.resolve_radius_px <= 0)
        throw std::invalid_argument("resolve_radius_px must be positive");
    if (options_.iou_threshold <= 0 || options_.iou_threshold >= 1)
        throw std::invalid_argument("iou_threshold must be in (0,1)");
}

std::vector<PixelPoint> SpecialistSuite::loc(std::string_view object_prompt) const {
    std::string prompt = normalize_prompt(object_prompt);
    bool match_all = prompt == "object" || prompt == "objects";
    std::optional<Shape> shape;
    if (!match_all) {
        shape = shape_for_prompt(prompt);
        if (!shape) return {};  // no points found
    }

    std::vector<PixelPoint> points;
    for (const Object3D& o : scene_->objects) {
        if (!match_all && o.shape != *shape) continue;
        PixelPoint p = project_center(*scene_, o.id);
        if (options_.backend == SpecialistBackend::perturbed && options_.loc_noise_px > 0) {
            std::string key = "loc|" + prompt + "|" + std::to_string(o.id);
            Rng noise(mix64(fnv1a64(key) ^ options_.noise_seed));
            p.u += options_.loc_noise_px * noise.gaussian();
            p.v += options_.loc_noise_px * noise.gaussian();
        }
        points.push_back(p);
    }
    std::sort(points.begin(), points.end(), [](const PixelPoint& a, const PixelPoint& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return points;
}

int SpecialistSuite::resolve_point(double x, double y) const {
    double best = 1e300;
    int best_id = -1;
    for (const Object3D& o : scene_->objects) {
        PixelPoint p = project_center(*scene_, o.id);
        double d = std::hypot(p.u - x, p.v - y);
        if (d < best) {
            best = d;
            best_id = o.id;
        }
    }
    if (best_id < 0 || (!options_.lenient_resolve && best > options_.resolve_radius_px))
        throw NoObjectAtPointError(x, y);
    return best_id;
}

std::string SpecialistSuite::vqa(std::string_view question, double x, double y) const {
    std::string q;
    for (char c : question) q.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    const Object3D& o = find_object(*scene_, resolve_point(x, y));
    if (contains_word(q, "color")) return std::string(to_word(o.color));
    if (contains_word(q, "material") || contains_word(q, "made of"))
        return std::string(to_word(o.material));
    if (contains_word(q, "size")) return std::string(to_word(o.size_class));
    if (contains_word(q, "shape") || contains_word(q, "what is this"))
        return std::string(to_word(o.shape));
    throw UnsupportedQuestionError(std::string(question));
}

double SpecialistSuite::depth_noise_factor(double x, double y) const {
    std::string key = "depth|" + format_double(x) + "|" + format_double(y);
    Rng noise(mix64(fnv1a64(key) ^ options_.noise_seed));
    return 1.0 + options_.depth_noise_frac * noise.gaussian();
}

double SpecialistSuite::depth(double x, double y) const {
    double z = ground_truth_depth(*scene_, resolve_point(x, y));
    if (options_.backend == SpecialistBackend::perturbed && options_.depth_noise_frac > 0)
        z *= depth_noise_factor(x, y);
    return z;
}

bool SpecialistSuite::same_object(double x1, double y1, double x2, double y2) const {
    PixelBox a = project_bbox(*scene_, resolve_point(x1, y1));
    PixelBox b = project_bbox(*scene_, resolve_point(x2, y2));
    return box_iou(a, b) > options_.iou_threshold;
}

std::pair<double, double> SpecialistSuite::object_size_2d(double x, double y) const {
    PixelBox b = project_bbox(*scene_, resolve_point(x, y));
    return {b.width(), b.height()};
}

} // namespace progsyn
