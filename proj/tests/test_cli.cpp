#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "progsyn/agents.hpp"
#include "progsyn/registry.hpp"

#include "helpers.hpp"

using namespace progsyn::testing;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(PROGSYN_BINARY_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE("cli: gen-scenes writes files and validates the range") {
    auto dir = fresh_tmp_dir("cli_scenes");
    CHECK(run_cli("gen-scenes --seed 0 --count 5 --out " + quoted(dir / "s")) == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "s"))
        if (e.path().extension() == ".json") ++files;
    CHECK(files == 5);

    // count 0 still succeeds with no files
    CHECK(run_cli("gen-scenes --seed 0 --count 0 --out " + quoted(dir / "none")) == 0);

    // identical inputs, identical bytes
    CHECK(run_cli("gen-scenes --seed 0 --count 5 --out " + quoted(dir / "s2")) == 0);
    CHECK(slurp(dir / "s" / "scene_0000.json") == slurp(dir / "s2" / "scene_0000.json"));
    CHECK(slurp(dir / "s" / "scene_0004.json") == slurp(dir / "s2" / "scene_0004.json"));

    // out-of-range object counts are a usage error
    CHECK(run_cli("gen-scenes --seed 0 --count 1 --objects-min 2 --objects-max 11 --out " +
                  quoted(dir / "bad")) == 2);
    CHECK(run_cli("gen-scenes --no-such-flag") == 2);
}

TEST_CASE("cli: missing artifacts exit 4, corrupt transcripts exit 3") {
    auto dir = fresh_tmp_dir("cli_missing");

    // run without a registry snapshot
    std::ofstream bench(dir / "bench.jsonl");
    bench << nlohmann::json({{"id", "x"},
                             {"scene", "scene.json"},
                             {"question", "Q?"},
                             {"answer", "yes"},
                             {"answer_type", "yes_no"}})
                 .dump()
          << "\n";
    bench.close();
    CHECK(run_cli("run --benchmark " + quoted(dir / "bench.jsonl") + " --registry " +
                  quoted(dir / "nope.json") + " --backend scripted --out " +
                  quoted(dir / "r.jsonl")) == 4);

    // build-api with a missing transcript
    std::ofstream qs(dir / "q.txt");
    qs << "How many cubes?\n";
    qs.close();
    CHECK(run_cli("build-api --questions " + quoted(dir / "q.txt") + " --backend replay " +
                  "--transcript " + quoted(dir / "nope.jsonl") + " --registry " +
                  quoted(dir / "api.json")) == 4);

    // corrupt transcript content is an agent failure
    std::ofstream corrupt(dir / "corrupt.jsonl");
    corrupt << "{broken\n";
    corrupt.close();
    CHECK(run_cli("build-api --questions " + quoted(dir / "q.txt") + " --backend replay " +
                  "--transcript " + quoted(dir / "corrupt.jsonl") + " --registry " +
                  quoted(dir / "api.json")) == 3);
}

TEST_CASE("cli: build-api replays a recorded session identically to the library") {
    auto dir = fresh_tmp_dir("cli_build_api");
    std::string t = " --templates '" PROGSYN_TEMPLATE_DIR "'";

    std::ofstream qs(dir / "q.txt");
    qs << "How many red objects are there?\n";
    qs << "Is there a cube left of the sphere?\n";
    qs.close();

    // record the session in-process with a scripted agent
    {
        progsyn::ApiRegistry registry(progsyn::ApiProfile::clevr);
        progsyn::ScriptedBackend scripted;
        scripted.enqueue(
            "<docstring>\"\"\"\nCounts red objects.\nArgs:\n    image (image): Image to "
            "search.\nReturns:\n    int: Number of red objects.\n\"\"\"</docstring>"
            "<signature>def _count_red(image):</signature>");
        scripted.enqueue(
            "<implementation>\n"
            "count = 0\n"
            "pts = loc(image, 'objects')\n"
            "for p in pts:\n"
            "    x, y = p\n"
            "    c = vqa(image, 'What color is this object?', x, y)\n"
            "    if c == 'red':\n"
            "        count = count + 1\n"
            "return count\n"
            "</implementation>");
        progsyn::RecordingBackend recorder(scripted, dir / "t.jsonl");
        progsyn::AgentSet agents{&recorder, &templates(), 0.7, progsyn::ApiProfile::clevr};
        auto pairs = progsyn::ask_signatures(
            agents, {"How many red objects are there?", "Is there a cube left of the sphere?"},
            registry);
        REQUIRE(registry.add_signatures(pairs).accepted == 1);
        auto provider = progsyn::make_implementation_provider(agents, registry);
        auto report = registry.implement_all(provider, progsyn::placeholder_suite());
        REQUIRE(report.implemented == std::vector<std::string>{"_count_red"});
        registry.save(dir / "api_lib.json");
    }

    // the CLI renders the same prompts, so the replay digests line up
    REQUIRE(run_cli("build-api --questions " + quoted(dir / "q.txt") + " --backend replay " +
                    "--transcript " + quoted(dir / "t.jsonl") + " --registry " +
                    quoted(dir / "api_cli.json") + t) == 0);
    CHECK(slurp(dir / "api_cli.json") == slurp(dir / "api_lib.json"));
    CHECK(slurp(dir / "api_cli.json").find("_count_red") != std::string::npos);
}

TEST_CASE("cli: full oracle pipeline end to end") {
    auto dir = fresh_tmp_dir("cli_pipeline");
    std::string t = " --templates '" PROGSYN_TEMPLATE_DIR "'";

    REQUIRE(run_cli("gen-scenes --seed 300 --count 3 --objects-min 4 --objects-max 6 --out " +
                    quoted(dir / "scenes")) == 0);
    REQUIRE(run_cli("gen-bench --scenes " + quoted(dir / "scenes") + " --seed 3 --out " +
                    quoted(dir / "bench.jsonl")) == 0);
    CHECK(fs::exists(dir / "bench.blueprints.jsonl"));

    // empty question set: the API build never calls the agent and ships
    // a predefined-only snapshot
    std::ofstream qs(dir / "q.txt");
    qs.close();
    std::ofstream empty_transcript(dir / "t.jsonl");
    empty_transcript.close();
    REQUIRE(run_cli("build-api --questions " + quoted(dir / "q.txt") + " --backend replay " +
                    "--transcript " + quoted(dir / "t.jsonl") + " --registry " +
                    quoted(dir / "api.json") + t) == 0);
    nlohmann::json snapshot = nlohmann::json::parse(slurp(dir / "api.json"));
    CHECK(snapshot["generated"].empty());

    // scripted backend answers from the blueprints sidecar; record a transcript
    REQUIRE(run_cli("run --benchmark " + quoted(dir / "bench.jsonl") + " --registry " +
                    quoted(dir / "api.json") + " --backend scripted --record " +
                    quoted(dir / "rec.jsonl") + " --out " + quoted(dir / "results.jsonl") + t) ==
            0);

    // replaying the recorded transcript reproduces the results byte for byte
    REQUIRE(run_cli("run --benchmark " + quoted(dir / "bench.jsonl") + " --registry " +
                    quoted(dir / "api.json") + " --backend replay --transcript " +
                    quoted(dir / "rec.jsonl") + " --out " + quoted(dir / "results2.jsonl") + t) ==
            0);
    CHECK(slurp(dir / "results.jsonl") == slurp(dir / "results2.jsonl"));
    CHECK(!slurp(dir / "results.jsonl").empty());

    REQUIRE(run_cli("score --results " + quoted(dir / "results.jsonl") + " --benchmark " +
                    quoted(dir / "bench.jsonl") + " --out " + quoted(dir / "report.json")) == 0);
    nlohmann::json report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["total"] == 100.0);
}
