#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "progsyn/ast.hpp"
#include "progsyn/errors.hpp"
#include "progsyn/interpreter.hpp"
#include "progsyn/predefined_api.hpp"

namespace progsyn {

// Semantic parameter types; these drive the placeholder inputs of test runs.
enum class SemType { image, integer, real, string, list, tuple };

std::string_view to_word(SemType t);
SemType sem_type_from_word(std::string_view w);

struct Param {
    std::string name;
    SemType type = SemType::integer;
};

struct MethodSignature {
    std::string name;
    std::vector<Param> params;
    std::string docstring;  // verbatim agent payload, usually including triple quotes

    std::string def_line() const;  // "def _name(a, b):"
    std::vector<std::string> param_names() const;
};

enum class MethodStatus { pending, implemented, dropped };

std::string_view to_word(MethodStatus s);
MethodStatus method_status_from_word(std::string_view w);

struct ApiMethod {
    MethodSignature signature;
    std::string body_text;
    std::optional<MethodBody> body;  // parsed form, present when body_text parses
    MethodStatus status = MethodStatus::pending;
    int error_count = 0;  // e_S, capped at the error budget
    std::string drop_reason;
};

struct AgentFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Context handed to the implementation provider on retries.
struct RetryInfo {
    std::string error_line;   // stable one-line error message
    std::string failed_text;  // the body that failed
};

// Returns the body text for a signature, or nullopt when the agent produced
// unusable output (counts toward the method's error budget). Throws
// AgentFailure on unrecoverable backend errors.
using ImplementationProvider =
    std::function<std::optional<std::string>(const MethodSignature&, const std::optional<RetryInfo>&)>;

inline constexpr int kErrorBudget = 5;

// Holds the five predefined modules plus agent-generated methods, and runs
// the API-construction loop: depth-first implementation of pending
// dependencies, per-method error budgets, and deletion of persistent
// dependency cycles.
class ApiRegistry : public MethodResolver {
public:
    explicit ApiRegistry(ApiProfile profile = ApiProfile::clevr);

    ApiProfile profile() const { return profile_; }

    struct AddOutcome {
        int accepted = 0;
        std::vector<std::string> malformed;  // reasons, for reporting
    };

    // Inserts (docstring, signature text) pairs as pending methods.
    // Duplicates by name are skipped silently; malformed entries (bad def
    // syntax, missing leading underscore, empty docstring) are skipped and
    // reported.
    AddOutcome add_signatures(const std::vector<std::pair<std::string, std::string>>& pairs);

    struct BuildReport {
        std::vector<std::string> implemented;
        std::vector<std::string> dropped;
        int agent_calls = 0;
    };

    // Implements every pending method in insertion order. On a clean test
    // run the method becomes implemented; an undefined pending dependency is
    // implemented first (depth-first); other errors are fed back to the
    // provider until the budget is exhausted. A dependency cycle persisting
    // for kErrorBudget joint attempts deletes every method in the cycle.
    BuildReport implement_all(const ImplementationProvider& provider,
                              const SpecialistSuite& placeholder_suite, const Limits& limits = {});

    // Docstring + def blocks: predefined first, then (optionally) the
    // implemented generated methods in insertion order. Dropped methods
    // never appear. Byte-stable for a fixed registry state.
    std::string render_api_docstrings(bool include_generated) const;

    // API state shown to the implementation agent: all non-dropped generated
    // signatures except the one being implemented, so methods can build on
    // pending dependencies.
    std::string render_generated_for_implementation(std::string_view exclude_name) const;

    // Implemented generated methods only, without the predefined block.
    std::string render_generated_docstrings() const;

    const ApiMethod* find_generated(std::string_view name) const;
    const std::vector<ApiMethod>& generated() const { return generated_; }

    std::optional<MethodView> resolve_method(const std::string& name) const override;

    nlohmann::json to_snapshot() const;
    static ApiRegistry from_snapshot(const nlohmann::json& j, ApiProfile profile);
    void save(const std::filesystem::path& file) const;
    static ApiRegistry load(const std::filesystem::path& file, ApiProfile profile);

private:
    enum class Outcome { implemented, dropped };

    Outcome implement(std::size_t index, const ImplementationProvider& provider,
                      const SpecialistSuite& suite, const Limits& limits, BuildReport& report);
    void drop(ApiMethod& method, const std::string& reason, BuildReport& report);
    bool on_stack(const std::string& name) const;
    std::vector<std::string> cycle_members(const std::string& from) const;

    ApiProfile profile_;
    std::vector<ApiMethod> generated_;                    // insertion order
    std::unordered_map<std::string, std::size_t> index_;  // name -> position
    std::vector<std::string> implementation_stack_;
    std::map<std::vector<std::string>, int> cycle_attempts_;  // sorted member names -> count
};

// Parses "def _name(a, b):"; throws std::invalid_argument when malformed.
// Parameter semantic types are read from "name (type)" annotations in the
// docstring when present, with name-based fallbacks otherwise.
MethodSignature parse_signature(const std::string& docstring, const std::string& signature_text);

// Runs the method once with placeholder arguments chosen by declared
// semantic type (image -> the placeholder suite, int -> 1, float -> 1.0,
// string -> "red", list -> [], tuple -> (1,1)). Returns the first
// RuntimeError, or nothing on a clean run.
std::optional<RuntimeError> test_run(const ApiMethod& method, const ApiRegistry& registry,
                                     const SpecialistSuite& placeholder_suite,
                                     const Limits& limits = {});

// Fixed 2-object scene behind a lenient-resolution oracle suite; shared by
// every test run.
const SpecialistSuite& placeholder_suite();

} // namespace progsyn
