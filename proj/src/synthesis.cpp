#include "progsyn/synthesis.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <future>

namespace progsyn {

ResultRecord synthesize_and_run(const std::string& item_id, const std::string& question,
                                const AgentSet& agents, const ApiRegistry& registry,
                                const SpecialistSuite& suite, int budget, const Limits& limits) {
    ResultRecord record;
    record.item_id = item_id;
    auto started = std::chrono::steady_clock::now();

    std::optional<RetryInfo> retry;
    int error_count = 0;  // e_P

    while (true) {
        ++record.attempts;
        std::optional<ProgramResponse> response = ask_program(agents, registry, question, retry);

        std::string one_line_error;
        if (!response) {
            record.program_texts.emplace_back("");
            record.attempt_trace_lines.push_back(0);
            one_line_error = "agent output did not contain a program block";
        } else {
            record.program_texts.push_back(response->program_text);
            record.plan_text = response->plan_text;
            try {
                Program program = parse_program(response->program_text);
                ExecutionResult result = execute_program(program, &registry, suite, limits);
                record.answer = result.final_result;
                record.trace = std::move(result.trace);
                record.attempt_trace_lines.push_back(
                    static_cast<int>(record.trace.entries.size()));
                break;  // success
            } catch (const RuntimeError& e) {
                one_line_error = e.render();
                record.attempt_trace_lines.push_back(0);
            }
        }

        ++error_count;
        if (error_count >= budget) {
            record.execution_error = one_line_error;
            break;
        }
        retry = RetryInfo{one_line_error,
                          response ? response->program_text : std::string()};
    }

    record.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    return record;
}

namespace {

ResultRecord run_one(const RunItem& item, const AgentSet& agents, const ApiRegistry& registry,
                     const BatchOptions& options) {
    SpecialistSuite suite(item.scene, options.suite_options);
    try {
        return synthesize_and_run(item.id, item.question, agents, registry, suite,
                                  options.budget, options.limits);
    } catch (const AgentFailure& e) {
        // per-item isolation: the batch carries on
        ResultRecord record;
        record.item_id = item.id;
        record.attempts = 0;
        record.execution_error = std::string("agent failure: ") + e.what();
        return record;
    }
}

} // namespace

std::vector<ResultRecord> run_batch(const std::vector<RunItem>& items, const AgentSet& agents,
                                    const ApiRegistry& registry, const BatchOptions& options) {
    std::vector<ResultRecord> records;
    records.resize(items.size());
    if (options.jobs <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i)
            records[i] = run_one(items[i], agents, registry, options);
        return records;
    }

    // fan-out for live backends; replay stays sequential by construction
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    int workers = std::min<int>(options.jobs, static_cast<int>(items.size()));
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= items.size()) return;
                records[i] = run_one(items[i], agents, registry, options);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return records;
}

nlohmann::json value_to_json(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::none: return {{"t", "none"}};
        case Value::Kind::boolean: return {{"t", "bool"}, {"v", v.as_bool()}};
        case Value::Kind::integer: return {{"t", "int"}, {"v", v.as_int()}};
        case Value::Kind::real: return {{"t", "float"}, {"v", v.as_real()}};
        case Value::Kind::string: return {{"t", "string"}, {"v", v.as_string()}};
        case Value::Kind::list:
        case Value::Kind::tuple: {
            nlohmann::json items = nlohmann::json::array();
            for (const Value& item : v.sequence_items()) items.push_back(value_to_json(item));
            return {{"t", v.kind() == Value::Kind::list ? "list" : "tuple"}, {"v", std::move(items)}};
        }
        case Value::Kind::image: return {{"t", "image"}};
    }
    return {{"t", "none"}};
}

Value value_from_json(const nlohmann::json& j) {
    std::string t = j.at("t").get<std::string>();
    if (t == "none") return Value::none();
    if (t == "bool") return Value::boolean(j.at("v").get<bool>());
    if (t == "int") return Value::integer(j.at("v").get<std::int64_t>());
    if (t == "float") return Value::real(j.at("v").get<double>());
    if (t == "string") return Value::str(j.at("v").get<std::string>());
    if (t == "list" || t == "tuple") {
        Value::List items;
        for (const auto& ji : j.at("v")) items.push_back(value_from_json(ji));
        return t == "list" ? Value::list(std::move(items)) : Value::tuple(std::move(items));
    }
    if (t == "image") return Value::image({nullptr});
    throw std::invalid_argument("unknown value tag: " + t);
}

nlohmann::json record_to_json(const ResultRecord& record, bool deterministic) {
    nlohmann::json trace = nlohmann::json::array();
    for (const TraceEntry& e : record.trace.entries) {
        nlohmann::json je = {{"line", e.line}, {"text", e.text}};
        if (!e.note.empty()) je["note"] = e.note;
        trace.push_back(std::move(je));
    }
    nlohmann::json j = {{"id", record.item_id},
                        {"attempts", record.attempts},
                        {"programs", record.program_texts},
                        {"attempt_trace_lines", record.attempt_trace_lines},
                        {"plan", record.plan_text},
                        {"trace", std::move(trace)},
                        {"wall_ms", deterministic ? 0.0 : record.wall_ms}};
    if (record.answer)
        j["answer"] = value_to_json(*record.answer);
    else
        j["answer"] = nullptr;
    if (record.execution_error)
        j["execution_error"] = *record.execution_error;
    else
        j["execution_error"] = nullptr;
    return j;
}

ResultRecord record_from_json(const nlohmann::json& j) {
    ResultRecord record;
    record.item_id = j.at("id").get<std::string>();
    record.attempts = j.at("attempts").get<int>();
    record.program_texts = j.at("programs").get<std::vector<std::string>>();
    record.attempt_trace_lines = j.value("attempt_trace_lines", std::vector<int>{});
    record.plan_text = j.value("plan", "");
    record.wall_ms = j.value("wall_ms", 0.0);
    if (j.contains("answer") && !j.at("answer").is_null())
        record.answer = value_from_json(j.at("answer"));
    if (j.contains("execution_error") && !j.at("execution_error").is_null())
        record.execution_error = j.at("execution_error").get<std::string>();
    for (const auto& je : j.value("trace", nlohmann::json::array())) {
        TraceEntry e;
        e.line = je.at("line").get<int>();
        e.text = je.at("text").get<std::string>();
        e.note = je.value("note", "");
        record.trace.entries.push_back(std::move(e));
    }
    return record;
}

void write_results(const std::vector<ResultRecord>& records, const std::filesystem::path& file,
                   bool deterministic) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write results file: " + file.string());
    for (const ResultRecord& r : records) out << record_to_json(r, deterministic).dump() << '\n';
}

std::vector<ResultRecord> read_results(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open results file: " + file.string());
    std::vector<ResultRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        records.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

} // namespace progsyn
