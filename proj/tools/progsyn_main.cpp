#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "progsyn/agents.hpp"
#include "progsyn/bench.hpp"
#include "progsyn/registry.hpp"
#include "progsyn/scene.hpp"
#include "progsyn/synthesis.hpp"

namespace fs = std::filesystem;
using namespace progsyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAgentFailure = 3;
constexpr int kExitMissingArtifact = 4;

struct MissingArtifact : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw MissingArtifact(what + " not found: " + p.string());
}

fs::path resolve_template_dir(std::string flag_value) {
    std::vector<fs::path> candidates;
    if (!flag_value.empty()) candidates.emplace_back(flag_value);
    if (const char* env = std::getenv("PROGSYN_TEMPLATES")) candidates.emplace_back(env);
    candidates.emplace_back("templates");
#ifdef PROGSYN_TEMPLATE_DIR
    candidates.emplace_back(PROGSYN_TEMPLATE_DIR);
#endif
    for (const fs::path& p : candidates)
        if (fs::exists(p / "signature.txt")) return p;
    throw MissingArtifact("template directory (looked for signature.txt; use --templates)");
}

std::vector<std::string> load_questions(const fs::path& file) {
    require_file(file, "questions file");
    std::vector<std::string> questions;
    if (file.extension() == ".jsonl") {
        for (const BenchmarkItem& item : read_benchmark(file)) questions.push_back(item.question);
        return questions;
    }
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        questions.push_back(line.substr(b, e - b + 1));
    }
    return questions;
}

struct BackendChoice {
    std::string mode = "replay";  // live | replay | scripted
    std::string transcript;
    std::string record;
    std::string blueprints;  // scripted mode's program source
};

// Builds the backend stack; the returned pointers own the chain.
struct BackendStack {
    std::unique_ptr<AgentBackend> primary;
    std::unique_ptr<AgentBackend> recorder;
    AgentBackend* active = nullptr;
};

BackendStack make_backend(const BackendChoice& choice, bool allow_scripted) {
    BackendStack stack;
    if (choice.mode == "live") {
        auto config = LiveConfig::from_environment();
        if (!config)
            throw AgentFailure(
                "live backend requires PROGSYN_API_BASE, PROGSYN_MODEL, and PROGSYN_API_KEY");
        stack.primary = std::make_unique<LiveBackend>(*config);
    } else if (choice.mode == "replay") {
        if (choice.transcript.empty())
            throw CLI::ValidationError("--transcript is required with --backend replay");
        require_file(choice.transcript, "transcript");
        stack.primary = std::make_unique<ReplayBackend>(ReplayBackend::from_file(choice.transcript));
    } else if (choice.mode == "scripted") {
        if (!allow_scripted)
            throw CLI::ValidationError("--backend scripted is only available for `run`");
        require_file(choice.blueprints, "blueprints file");
        stack.primary = std::make_unique<OracleProgramBackend>(read_blueprints(choice.blueprints));
    } else {
        throw CLI::ValidationError("unknown backend: " + choice.mode);
    }
    stack.active = stack.primary.get();
    if (!choice.record.empty()) {
        stack.recorder = std::make_unique<RecordingBackend>(*stack.primary, choice.record);
        stack.active = stack.recorder.get();
    }
    return stack;
}

int cmd_gen_scenes(std::uint64_t seed, int count, int n_min, int n_max, const fs::path& out_dir,
                   const Camera& camera) {
    if (n_min < 2 || n_max > 10 || n_min > n_max) {
        std::cerr << "object count range must lie within [2,10]\n";
        return kExitUsage;
    }
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        int n = n_min + (n_max > n_min ? i % (n_max - n_min + 1) : 0);
        Scene scene = generate_scene(seed + static_cast<std::uint64_t>(i), n, camera);
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.json", i);
        write_scene(scene, out_dir / name);
    }
    std::cout << "wrote " << count << " scene files to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_gen_bench(const fs::path& scenes_dir, const fs::path& out_file, std::uint64_t seed,
                  int per_kind, bool hypothetical) {
    require_file(scenes_dir, "scenes directory");
    std::vector<fs::path> scene_files;
    for (const auto& entry : fs::directory_iterator(scenes_dir))
        if (entry.path().extension() == ".json") scene_files.push_back(entry.path());
    std::sort(scene_files.begin(), scene_files.end());

    GenOptions options;
    options.per_kind = per_kind;
    if (hypothetical) options.kinds = {QuestionKind::hypothetical_scale};

    fs::path out_parent = out_file.parent_path().empty() ? "." : out_file.parent_path();
    std::vector<ItemBlueprint> blueprints;
    std::uint64_t index = 0;
    for (const fs::path& scene_file : scene_files) {
        Scene scene = read_scene(scene_file);
        fs::path rel = fs::relative(scene_file, out_parent);
        auto items = generate_items(scene, rel.string(), seed + index++, options);
        blueprints.insert(blueprints.end(), std::make_move_iterator(items.begin()),
                          std::make_move_iterator(items.end()));
    }

    std::vector<BenchmarkItem> items;
    items.reserve(blueprints.size());
    for (const ItemBlueprint& bp : blueprints) items.push_back(bp.item);
    write_benchmark(items, out_file);

    fs::path blueprint_file = out_file;
    blueprint_file.replace_extension("");
    blueprint_file += ".blueprints.jsonl";
    write_blueprints(blueprints, blueprint_file);

    std::cout << "wrote " << items.size() << " items to " << out_file.string() << " (blueprints: "
              << blueprint_file.string() << ")\n";
    return kExitOk;
}

int cmd_build_api(const fs::path& questions_file, const fs::path& registry_file,
                  const BackendChoice& backend_choice, const fs::path& template_dir,
                  double temperature, int batch_size, int max_batches, ApiProfile profile,
                  const fs::path& report_file) {
    std::vector<std::string> questions = load_questions(questions_file);
    TemplateLibrary templates = TemplateLibrary::load(template_dir);
    BackendStack backend = make_backend(backend_choice, /*allow_scripted=*/false);
    AgentSet agents{backend.active, &templates, temperature, profile};

    ApiRegistry registry(profile);
    int batches = 0;
    for (std::size_t start = 0; start < questions.size(); start += batch_size) {
        if (max_batches > 0 && batches >= max_batches) break;
        std::vector<std::string> batch(
            questions.begin() + static_cast<std::ptrdiff_t>(start),
            questions.begin() +
                static_cast<std::ptrdiff_t>(std::min(start + batch_size, questions.size())));
        auto pairs = ask_signatures(agents, batch, registry);
        auto outcome = registry.add_signatures(pairs);
        for (const std::string& reason : outcome.malformed)
            std::cerr << "skipped malformed signature: " << reason << "\n";
        ++batches;
    }

    auto provider = make_implementation_provider(agents, registry);
    ApiRegistry::BuildReport report = registry.implement_all(provider, placeholder_suite());
    registry.save(registry_file);

    std::cout << "implemented " << report.implemented.size() << ", dropped "
              << report.dropped.size() << " (agent calls: " << report.agent_calls << ")\n";
    for (const ApiMethod& m : registry.generated())
        std::cout << "  " << to_word(m.status) << "  e=" << m.error_count << "  "
                  << m.signature.name << (m.drop_reason.empty() ? "" : "  [" + m.drop_reason + "]")
                  << "\n";

    if (!report_file.empty()) {
        nlohmann::json methods = nlohmann::json::array();
        for (const ApiMethod& m : registry.generated())
            methods.push_back({{"name", m.signature.name},
                               {"status", to_word(m.status)},
                               {"error_count", m.error_count},
                               {"drop_reason", m.drop_reason}});
        nlohmann::json j = {{"implemented", report.implemented},
                            {"dropped", report.dropped},
                            {"agent_calls", report.agent_calls},
                            {"methods", std::move(methods)}};
        std::ofstream out(report_file);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_run(const fs::path& benchmark_file, const fs::path& registry_file,
            const BackendChoice& backend_choice, const fs::path& template_dir, double temperature,
            ApiProfile profile, int budget, int jobs, const std::string& suite_backend,
            std::uint64_t noise_seed, const fs::path& out_file, const fs::path& scenes_dir) {
    require_file(registry_file, "registry snapshot");
    require_file(benchmark_file, "benchmark file");
    ApiRegistry registry = ApiRegistry::load(registry_file, profile);
    std::vector<BenchmarkItem> items = read_benchmark(benchmark_file);

    // scene paths resolve relative to the benchmark file unless overridden
    fs::path base = scenes_dir;
    if (base.empty())
        base = benchmark_file.parent_path().empty() ? "." : benchmark_file.parent_path();
    std::map<std::string, std::shared_ptr<const Scene>> scene_cache;
    std::vector<RunItem> run_items;
    for (const BenchmarkItem& item : items) {
        auto& cached = scene_cache[item.scene_file];
        if (!cached) {
            fs::path scene_path = base / item.scene_file;
            require_file(scene_path, "scene file");
            cached = std::make_shared<const Scene>(read_scene(scene_path));
        }
        run_items.push_back({item.id, item.question, cached});
    }

    TemplateLibrary templates = TemplateLibrary::load(template_dir);
    BackendStack backend = make_backend(backend_choice, /*allow_scripted=*/true);
    AgentSet agents{backend.active, &templates, temperature, profile};

    BatchOptions options;
    options.budget = budget;
    options.suite_options.backend =
        suite_backend == "perturbed" ? SpecialistBackend::perturbed : SpecialistBackend::oracle;
    options.suite_options.noise_seed = noise_seed;
    options.deterministic = backend_choice.mode != "live";
    options.jobs = backend_choice.mode == "live" ? jobs : 1;

    std::vector<ResultRecord> records = run_batch(run_items, agents, registry, options);
    write_results(records, out_file, options.deterministic);

    int failed = 0;
    for (const ResultRecord& r : records)
        if (r.execution_error) ++failed;
    std::cout << "ran " << records.size() << " items (" << failed << " execution errors) -> "
              << out_file.string() << "\n";
    return kExitOk;
}

int cmd_score(const fs::path& results_file, const fs::path& benchmark_file,
              const fs::path& report_file) {
    require_file(results_file, "results file");
    require_file(benchmark_file, "benchmark file");
    std::vector<ResultRecord> records = read_results(results_file);
    std::vector<BenchmarkItem> items = read_benchmark(benchmark_file);
    ScoreReport report = score(records, items);
    std::cout << report_table(report);
    if (!report_file.empty()) {
        std::ofstream out(report_file);
        out << report_to_json(report).dump(2) << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agentic visual program synthesis over oracle scenes"};
    app.require_subcommand(1);

    // gen-scenes
    auto* gen_scenes = app.add_subcommand("gen-scenes", "generate synthetic scene files");
    std::uint64_t gs_seed = 0;
    int gs_count = 10, gs_min = 2, gs_max = 10;
    std::string gs_out = "scenes";
    Camera gs_camera;
    gen_scenes->add_option("--seed", gs_seed, "base seed");
    gen_scenes->add_option("--count", gs_count, "number of scenes");
    gen_scenes->add_option("--objects-min", gs_min, "minimum objects per scene");
    gen_scenes->add_option("--objects-max", gs_max, "maximum objects per scene");
    gen_scenes->add_option("--out", gs_out, "output directory");
    gen_scenes->add_option("--focal", gs_camera.focal_px, "focal length, pixels");

    // gen-bench
    auto* gen_bench = app.add_subcommand("gen-bench", "generate benchmark items from scenes");
    std::string gb_scenes = "scenes", gb_out = "bench.jsonl";
    std::uint64_t gb_seed = 0;
    int gb_per_kind = 1;
    bool gb_hypothetical = false;
    gen_bench->add_option("--scenes", gb_scenes, "scene directory");
    gen_bench->add_option("--out", gb_out, "benchmark output (.jsonl)");
    gen_bench->add_option("--seed", gb_seed, "generation seed");
    gen_bench->add_option("--per-kind", gb_per_kind, "items per question kind per scene");
    gen_bench->add_flag("--hypothetical", gb_hypothetical,
                        "generate image-space size-scaling questions only");

    // shared backend flags
    auto add_backend_flags = [](CLI::App* cmd, BackendChoice& choice) {
        cmd->add_option("--backend", choice.mode, "live | replay | scripted")
            ->check(CLI::IsMember({"live", "replay", "scripted"}));
        cmd->add_option("--transcript", choice.transcript, "replay transcript (JSONL)");
        cmd->add_option("--record", choice.record, "record a transcript to this path");
    };

    // build-api
    auto* build_api = app.add_subcommand("build-api", "grow the method API from questions");
    std::string ba_questions, ba_registry = "registry.json", ba_templates, ba_report;
    std::string ba_profile = "clevr";
    BackendChoice ba_backend;
    double ba_temperature = 0.7;
    int ba_batch_size = 15, ba_max_batches = 0;
    build_api->add_option("--questions", ba_questions, "questions file (text or .jsonl)")
        ->required();
    build_api->add_option("--registry", ba_registry, "registry snapshot output");
    build_api->add_option("--templates", ba_templates, "prompt template directory");
    build_api->add_option("--temperature", ba_temperature, "sampling temperature");
    build_api->add_option("--batch-size", ba_batch_size, "questions per signature batch")
        ->check(CLI::PositiveNumber);
    build_api->add_option("--max-batches", ba_max_batches, "0 = all batches");
    build_api->add_option("--profile", ba_profile, "clevr | omni3d")
        ->check(CLI::IsMember({"clevr", "omni3d"}));
    build_api->add_option("--report", ba_report, "write a build report JSON");
    add_backend_flags(build_api, ba_backend);

    // run
    auto* run = app.add_subcommand("run", "synthesize and execute programs for a benchmark");
    std::string r_benchmark, r_registry = "registry.json", r_templates, r_out = "results.jsonl";
    std::string r_profile = "clevr", r_suite = "oracle", r_scenes;
    BackendChoice r_backend;
    double r_temperature = 0.7;
    int r_budget = 5, r_jobs = 1;
    std::uint64_t r_noise_seed = 0;
    run->add_option("--benchmark", r_benchmark, "benchmark items (.jsonl)")->required();
    run->add_option("--scenes", r_scenes, "base directory for scene references");
    run->add_option("--registry", r_registry, "registry snapshot");
    run->add_option("--templates", r_templates, "prompt template directory");
    run->add_option("--temperature", r_temperature, "sampling temperature");
    run->add_option("--budget", r_budget, "program regeneration budget")
        ->check(CLI::PositiveNumber);
    run->add_option("--jobs", r_jobs, "parallel items (live mode only)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", r_out, "results output (.jsonl)");
    run->add_option("--suite", r_suite, "oracle | perturbed specialists")
        ->check(CLI::IsMember({"oracle", "perturbed"}));
    run->add_option("--noise-seed", r_noise_seed, "perturbed-suite noise seed");
    run->add_option("--profile", r_profile, "clevr | omni3d")
        ->check(CLI::IsMember({"clevr", "omni3d"}));
    run->add_option("--blueprints", r_backend.blueprints,
                    "blueprints file for the scripted backend");
    add_backend_flags(run, r_backend);

    // score
    auto* score_cmd = app.add_subcommand("score", "score results against a benchmark");
    std::string s_results, s_benchmark, s_report;
    score_cmd->add_option("--results", s_results, "results file (.jsonl)")->required();
    score_cmd->add_option("--benchmark", s_benchmark, "benchmark items (.jsonl)")->required();
    score_cmd->add_option("--out", s_report, "write the report JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen_scenes->parsed())
            return cmd_gen_scenes(gs_seed, gs_count, gs_min, gs_max, gs_out, gs_camera);
        if (gen_bench->parsed())
            return cmd_gen_bench(gb_scenes, gb_out, gb_seed, gb_per_kind, gb_hypothetical);
        if (build_api->parsed())
            return cmd_build_api(ba_questions, ba_registry, ba_backend,
                                 resolve_template_dir(ba_templates), ba_temperature,
                                 ba_batch_size, ba_max_batches, profile_from_word(ba_profile),
                                 ba_report);
        if (run->parsed()) {
            if (r_backend.mode == "scripted" && r_backend.blueprints.empty()) {
                fs::path bp = r_benchmark;
                bp.replace_extension("");
                bp += ".blueprints.jsonl";
                r_backend.blueprints = bp.string();
            }
            return cmd_run(r_benchmark, r_registry, r_backend, resolve_template_dir(r_templates),
                           r_temperature, profile_from_word(r_profile), r_budget, r_jobs, r_suite,
                           r_noise_seed, r_out, r_scenes);
        }
        if (score_cmd->parsed()) return cmd_score(s_results, s_benchmark, s_report);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const MissingArtifact& e) {
        std::cerr << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const AgentFailure& e) {
        std::cerr << "agent failure: " << e.what() << "\n";
        return kExitAgentFailure;
    } catch (const OutOfRangeError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const IdMismatchError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
