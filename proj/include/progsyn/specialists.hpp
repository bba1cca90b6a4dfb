#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "progsyn/scene.hpp"

namespace progsyn {

struct NoObjectAtPointError : std::runtime_error {
    NoObjectAtPointError(double x, double y)
        : std::runtime_error("no object at point (" + format_double(x) + ", " + format_double(y) + ")") {}
};

struct UnsupportedQuestionError : std::runtime_error {
    explicit UnsupportedQuestionError(const std::string& q)
        : std::runtime_error("cannot answer question: " + q) {}
};

enum class SpecialistBackend { oracle, perturbed };

struct SuiteOptions {
    SpecialistBackend backend = SpecialistBackend::oracle;
    double resolve_radius_px = 10.0;
    double iou_threshold = 0.92;
    std::uint64_t noise_seed = 0;
    double loc_noise_px = 2.0;       // stddev of the pixel jitter on loc points
    double depth_noise_frac = 0.15;  // stddev of the multiplicative depth error
    // Placeholder/test mode: resolve to the nearest object regardless of
    // radius, so method bodies probed with synthetic inputs exercise their
    // logic instead of failing on point lookup.
    bool lenient_resolve = false;
};

// The five predefined modules (loc, vqa, depth, same_object,
// get_2D_object_size) answered from scene ground truth. The perturbed
// backend adds seeded noise to loc points and depth values; noise is a pure
// function of (noise_seed, call arguments), so calls are order-independent.
class SpecialistSuite {
public:
    explicit SpecialistSuite(std::shared_ptr<const Scene> scene, SuiteOptions options = {});

    // Pixel points of all objects whose category matches the prompt:
    // "object"/"objects" match everything, shape words (plural or singular,
    // "square" aliasing to cube) match by shape. Sorted ascending by (u, v);
    // an empty list is the no-match signal.
    std::vector<PixelPoint> loc(std::string_view object_prompt) const;

    // Id of the object whose projected center is nearest to (x, y) and
    // within resolve_radius_px; throws NoObjectAtPointError otherwise.
    int resolve_point(double x, double y) const;

    // Keyword-routed attribute lookup: color | material | size |
    // shape/"what is this". Throws UnsupportedQuestionError when no
    // keyword matches.
    std::string vqa(std::string_view question, double x, double y) const;

    double depth(double x, double y) const;

    // IoU of the two resolved objects' boxes, strictly above the threshold.
    bool same_object(double x1, double y1, double x2, double y2) const;

    // (width, height) of the resolved object's projected box, pixels.
    std::pair<double, double> object_size_2d(double x, double y) const;

    const Scene& scene() const { return *scene_; }
    const SuiteOptions& options() const { return options_; }
    std::shared_ptr<const Scene> scene_ptr() const { return scene_; }

private:
    double depth_noise_factor(double x, double y) const;

    std::shared_ptr<const Scene> scene_;
    SuiteOptions options_;
};

} // namespace progsyn
