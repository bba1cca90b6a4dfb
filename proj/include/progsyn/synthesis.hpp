#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsyn/agents.hpp"
#include "progsyn/interpreter.hpp"

namespace progsyn {

// Outcome of one benchmark item: the synthesized programs, the attempt
// count, and either a final value or the execution error that exhausted the
// budget.
struct ResultRecord {
    std::string item_id;
    int attempts = 0;                        // number of program requests (e_P + final)
    std::vector<std::string> program_texts;  // one per attempt
    std::vector<int> attempt_trace_lines;    // trace length per attempt
    std::string plan_text;                   // final attempt's text outside the tags
    std::optional<Value> answer;
    std::optional<std::string> execution_error;  // one-line message
    ExecutionTrace trace;                        // final attempt only
    double wall_ms = 0.0;
};

inline constexpr int kProgramBudget = 5;

// One question end to end: ask for a program (with the prior error appended
// on retries), execute, and repeat while execution keeps failing and the
// budget allows. Interpreter errors never escape; AgentFailure does.
ResultRecord synthesize_and_run(const std::string& item_id, const std::string& question,
                                const AgentSet& agents, const ApiRegistry& registry,
                                const SpecialistSuite& suite, int budget = kProgramBudget,
                                const Limits& limits = {});

struct RunItem {
    std::string id;
    std::string question;
    std::shared_ptr<const Scene> scene;
};

struct BatchOptions {
    int budget = kProgramBudget;
    Limits limits;
    SuiteOptions suite_options;
    int jobs = 1;               // >1 allowed in live mode only
    bool deterministic = true;  // zero wall times in serialized records
};

// Order-preserving map over items. A failing item records its error and the
// batch continues; an AgentFailure is captured in the item's record too.
std::vector<ResultRecord> run_batch(const std::vector<RunItem>& items, const AgentSet& agents,
                                    const ApiRegistry& registry, const BatchOptions& options);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const ResultRecord& record, bool deterministic);
ResultRecord record_from_json(const nlohmann::json& j);

void write_results(const std::vector<ResultRecord>& records, const std::filesystem::path& file,
                   bool deterministic);
std::vector<ResultRecord> read_results(const std::filesystem::path& file);

} // namespace progsyn
