#include <doctest.h>

#include <fstream>

#include "progsyn/synthesis.hpp"

#include "helpers.hpp"

using namespace progsyn;
using namespace progsyn::testing;

namespace {

std::string wrap_program(const std::string& body) {
    return "<program>\n" + body + "\n</program>";
}

} // namespace

TEST_CASE("synthesize_and_run: success on the first attempt") {
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    backend.enqueue(wrap_program("final_result = 1 + 2"));
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    SpecialistSuite suite = oracle_suite(scene_t1());

    ResultRecord record = synthesize_and_run("item-0", "What is one plus two?", agents, registry,
                                             suite);
    CHECK(record.attempts == 1);
    REQUIRE(record.answer.has_value());
    CHECK(record.answer->as_int() == 3);
    CHECK_FALSE(record.execution_error.has_value());
    CHECK(record.program_texts.size() == 1);
}

TEST_CASE("synthesize_and_run: two failures then success, errors thread through prompts") {
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    backend.enqueue(wrap_program("final_result = missing_name"));
    backend.enqueue(wrap_program("final_result = also_missing"));
    backend.enqueue(wrap_program("final_result = 7"));
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    SpecialistSuite suite = oracle_suite(scene_t1());

    ResultRecord record = synthesize_and_run("item-1", "Q", agents, registry, suite);
    CHECK(record.attempts == 3);
    REQUIRE(record.answer.has_value());
    CHECK(record.answer->as_int() == 7);
    CHECK(record.program_texts.size() == 3);

    // attempt k's prompt carries attempt k-1's exact error line
    REQUIRE(backend.prompts.size() == 3);
    CHECK(backend.prompts[1].find(
              "UndefinedVariable at line 1: name 'missing_name' is not defined") !=
          std::string::npos);
    CHECK(backend.prompts[1].find("final_result = missing_name") != std::string::npos);
    CHECK(backend.prompts[2].find(
              "UndefinedVariable at line 1: name 'also_missing' is not defined") !=
          std::string::npos);
    CHECK(backend.prompts[0].find("UndefinedVariable") == std::string::npos);
}

TEST_CASE("synthesize_and_run: budget exhaustion yields an execution error") {
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    for (int i = 0; i < 5; ++i) backend.enqueue(wrap_program("final_result = 1 / 0"));
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    SpecialistSuite suite = oracle_suite(scene_t1());

    ResultRecord record = synthesize_and_run("item-2", "Q", agents, registry, suite);
    CHECK(record.attempts == 5);
    CHECK_FALSE(record.answer.has_value());
    REQUIRE(record.execution_error.has_value());
    CHECK(*record.execution_error == "DivisionByZero at line 1: division by zero");
    CHECK(backend.prompts.size() == 5);  // budget exactness
}

TEST_CASE("synthesize_and_run: malformed agent output consumes an attempt") {
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    backend.enqueue("no tags");      // attempt 1, first ask
    backend.enqueue("still none");   // attempt 1, single re-ask
    backend.enqueue(wrap_program("final_result = 'yes'"));  // attempt 2
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    SpecialistSuite suite = oracle_suite(scene_t1());

    ResultRecord record = synthesize_and_run("item-3", "Q", agents, registry, suite);
    CHECK(record.attempts == 2);
    REQUIRE(record.answer.has_value());
    CHECK(record.answer->as_string() == "yes");
}

TEST_CASE("run_batch: order preserved, failures isolated") {
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    backend.enqueue(wrap_program("final_result = 'yes'"));
    for (int i = 0; i < 5; ++i) backend.enqueue(wrap_program("final_result = broken"));
    backend.enqueue(wrap_program("final_result = 2"));
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};

    std::vector<RunItem> items = {
        {"a", "Question a?", scene_t1()},
        {"b", "Question b?", scene_t1()},
        {"c", "Question c?", scene_t1()},
    };
    BatchOptions options;
    std::vector<ResultRecord> records = run_batch(items, agents, registry, options);
    REQUIRE(records.size() == 3);
    CHECK(records[0].item_id == "a");
    CHECK(records[1].item_id == "b");
    CHECK(records[2].item_id == "c");
    CHECK(records[0].answer.has_value());
    CHECK(records[1].execution_error.has_value());
    CHECK(records[1].attempts == 5);
    CHECK(records[2].answer->as_int() == 2);

    // empty input, empty output
    CHECK(run_batch({}, agents, registry, options).empty());
}

TEST_CASE("run_batch: an exhausted transcript marks the item, not the batch") {
    ApiRegistry registry(ApiProfile::clevr);
    ReplayBackend backend(std::vector<TranscriptEntry>{});  // nothing recorded
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    std::vector<RunItem> items = {{"only", "Q?", scene_t1()}};
    BatchOptions options;
    std::vector<ResultRecord> records = run_batch(items, agents, registry, options);
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].execution_error.has_value());
    CHECK(records[0].execution_error->find("agent failure") != std::string::npos);
}

TEST_CASE("result records round-trip through JSONL") {
    auto dir = fresh_tmp_dir("results_roundtrip");
    ApiRegistry registry(ApiProfile::clevr);
    ScriptedBackend backend;
    backend.enqueue(wrap_program("final_result = loc(image, 'objects')"));
    AgentSet agents{&backend, &templates(), 0.7, ApiProfile::clevr};
    SpecialistSuite suite = oracle_suite(scene_t1());

    ResultRecord record = synthesize_and_run("rt", "Q", agents, registry, suite);
    write_results({record}, dir / "r.jsonl", true);
    auto loaded = read_results(dir / "r.jsonl");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].item_id == "rt");
    CHECK(loaded[0].attempts == 1);
    REQUIRE(loaded[0].answer.has_value());
    CHECK(loaded[0].answer->kind() == Value::Kind::list);
    CHECK(loaded[0].answer->sequence_items().size() == 3);
    CHECK(loaded[0].wall_ms == 0.0);  // deterministic mode zeroes timing

    // writing the loaded records again is byte-identical
    write_results(loaded, dir / "r2.jsonl", true);
    std::ifstream f1(dir / "r.jsonl"), f2(dir / "r2.jsonl");
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}
