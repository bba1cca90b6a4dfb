#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace progsyn {

// Which prompt/material variant the pipeline runs with. The clevr profile
// works with the small/large size vocabulary and omits get_2D_object_size
// from the rendered API; the omni3d profile includes it and the metric-size
// guidance.
enum class ApiProfile { clevr, omni3d };

std::string_view to_word(ApiProfile p);
ApiProfile profile_from_word(std::string_view w);

struct PredefinedModule {
    std::string name;
    std::vector<std::string> params;
    std::string docstring_clevr;   // empty when absent from the clevr API
    std::string docstring_omni3d;
};

const std::vector<PredefinedModule>& predefined_modules();

bool is_predefined_name(std::string_view name);

// Docstring + "def ..." blocks for the profile's predefined modules, in
// canonical order, separated by blank lines.
std::string render_predefined_docstrings(ApiProfile profile);

} // namespace progsyn
