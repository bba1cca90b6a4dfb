#pragma once

#include <string>

#include "progsyn/registry.hpp"

namespace progsyn::testing {

// Scripted build scenarios used by both the unit tests and the acceptance
// suite; each returns the registry after implement_all so snapshots can be
// compared against goldens.

// _count_left is proposed before its dependency _is_left_of, forcing the
// depth-first detour.
inline ApiRegistry build_chain_registry(ApiRegistry::BuildReport* report_out = nullptr) {
    ApiRegistry registry(ApiProfile::clevr);
    registry.add_signatures({
        {"\"\"\"\nCounts objects left of a reference point.\nArgs:\n    image (image): Image to "
         "search.\n    ref_x (int): X coordinate.\n    ref_y (int): Y coordinate.\nReturns:\n    "
         "int: Number of objects to the left.\n\"\"\"",
         "def _count_left(image, ref_x, ref_y):"},
        {"\"\"\"\nChecks whether point 1 is left of point 2.\nArgs:\n    image (image): Image.\n  "
         "  x_1 (int): X of point 1.\n    y_1 (int): Y of point 1.\n    x_2 (int): X of point "
         "2.\n    y_2 (int): Y of point 2.\nReturns:\n    bool: True if point 1 is left.\n\"\"\"",
         "def _is_left_of(image, x_1, y_1, x_2, y_2):"},
    });

    ImplementationProvider provider = [](const MethodSignature& sig,
                                         const std::optional<RetryInfo>&)
        -> std::optional<std::string> {
        if (sig.name == "_count_left")
            return "count = 0\n"
                   "pts = loc(image, 'objects')\n"
                   "for p in pts:\n"
                   "    x, y = p\n"
                   "    if _is_left_of(image, x, y, ref_x, ref_y):\n"
                   "        count = count + 1\n"
                   "return count\n";
        if (sig.name == "_is_left_of") return "return x_1 < x_2\n";
        return std::nullopt;
    };
    auto report = registry.implement_all(provider, placeholder_suite());
    if (report_out) *report_out = report;
    return registry;
}

// a method whose body keeps failing: five strikes and it is dropped
inline ApiRegistry build_budget_registry(int* agent_calls_out = nullptr) {
    ApiRegistry registry(ApiProfile::clevr);
    registry.add_signatures({
        {"\"\"\"\nAlways divides by zero.\nArgs:\n    image (image): Image.\nReturns:\n    int: "
         "Never returns.\n\"\"\"",
         "def _always_breaks(image):"},
    });
    ImplementationProvider provider = [](const MethodSignature&, const std::optional<RetryInfo>&)
        -> std::optional<std::string> { return "return 1 / 0\n"; };
    auto report = registry.implement_all(provider, placeholder_suite());
    if (agent_calls_out) *agent_calls_out = report.agent_calls;
    return registry;
}

// _a and _b call each other; the cycle persists and both are deleted
inline ApiRegistry build_cycle_registry() {
    ApiRegistry registry(ApiProfile::clevr);
    registry.add_signatures({
        {"\"\"\"\nForwarder to _b.\nArgs:\n    image (image): Image.\nReturns:\n    int: "
         "Whatever _b returns.\n\"\"\"",
         "def _a(image):"},
        {"\"\"\"\nForwarder to _a.\nArgs:\n    image (image): Image.\nReturns:\n    int: "
         "Whatever _a returns.\n\"\"\"",
         "def _b(image):"},
    });
    ImplementationProvider provider = [](const MethodSignature& sig,
                                         const std::optional<RetryInfo>&)
        -> std::optional<std::string> {
        if (sig.name == "_a") return "return _b(image)\n";
        if (sig.name == "_b") return "return _a(image)\n";
        return std::nullopt;
    };
    registry.implement_all(provider, placeholder_suite());
    return registry;
}

} // namespace progsyn::testing
