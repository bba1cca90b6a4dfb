#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "progsyn/ast.hpp"
#include "progsyn/errors.hpp"
#include "progsyn/specialists.hpp"
#include "progsyn/value.hpp"

namespace progsyn {

struct Limits {
    std::int64_t max_steps = 1'000'000;  // evaluated nodes
    int max_depth = 64;                  // method-call nesting
    std::size_t max_trace = 10'000;      // recorded trace entries
};

struct TraceEntry {
    int line = 0;
    std::string text;  // source line of the statement
    std::string note;  // bound values summary, when applicable
};

struct ExecutionTrace {
    std::vector<TraceEntry> entries;
    bool truncated = false;
    std::int64_t steps = 0;
};

struct ExecutionResult {
    Value final_result;
    ExecutionTrace trace;
};

// Call resolution hook for generated methods; only implemented methods are
// visible to running programs.
struct MethodView {
    const std::vector<std::string>* params = nullptr;
    const MethodBody* body = nullptr;
};

class MethodResolver {
public:
    virtual ~MethodResolver() = default;
    virtual std::optional<MethodView> resolve_method(const std::string& name) const = 0;
};

// Runs a program with the variable `image` pre-bound to the suite. Call
// resolution order: predefined specialists, then registry methods, then
// built-ins (len/abs/min/max/append); anything else raises UndefinedMethod.
// Returns the final_result binding; raises MissingFinalResult when the
// program never assigns it.
ExecutionResult execute_program(const Program& program, const MethodResolver* registry,
                                const SpecialistSuite& suite, const Limits& limits = {});

// Invokes a parsed method body with explicit argument values (positional,
// matched to body.params). Shares all sandbox rules with execute_program.
Value call_method_with_values(const MethodBody& method, const std::vector<Value>& args,
                              const MethodResolver* registry, const SpecialistSuite& suite,
                              const Limits& limits = {}, ExecutionTrace* trace_out = nullptr);

} // namespace progsyn
