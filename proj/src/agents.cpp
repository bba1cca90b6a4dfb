#include "progsyn/agents.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#ifdef PROGSYN_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "progsyn/rng.hpp"

namespace progsyn {

std::string_view to_word(TemplateId id) {
    switch (id) {
        case TemplateId::signature: return "signature";
        case TemplateId::implementation: return "implementation";
        case TemplateId::program: return "program";
    }
    return "?";
}

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    const std::string& text = tmpl.text;
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '{') {
            if (i + 1 < text.size() && text[i + 1] == '{') {
                out += '{';
                ++i;
                continue;
            }
            auto end = text.find('}', i + 1);
            if (end == std::string::npos)
                throw UnboundPlaceholderError(text.substr(i + 1, 20) + "...");
            std::string name = text.substr(i + 1, end - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end()) throw UnboundPlaceholderError(name);
            out += it->second;
            i = end;
            continue;
        }
        if (c == '}') {
            if (i + 1 < text.size() && text[i + 1] == '}') {
                out += '}';
                ++i;
                continue;
            }
            throw UnboundPlaceholderError("stray '}' in template");
        }
        out += c;
    }
    return out;
}

namespace {

std::string trim_copy(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::vector<std::string> parse_tagged_blocks(const std::string& text, std::string_view tag) {
    std::string open = "<" + std::string(tag) + ">";
    std::string close = "</" + std::string(tag) + ">";
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        auto start = text.find(open, pos);
        if (start == std::string::npos) break;
        auto body = start + open.size();
        auto end = text.find(close, body);
        if (end == std::string::npos) throw UnbalancedTagsError(std::string(tag));
        blocks.push_back(trim_copy(std::string_view(text).substr(body, end - body)));
        pos = end + close.size();
    }
    if (blocks.empty()) throw MissingTagError(std::string(tag));
    return blocks;
}

std::string request_digest(TemplateId id, const std::string& prompt, double temperature) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6g", temperature);
    std::uint64_t h = fnv1a64(to_word(id));
    h = fnv1a64("|", h);
    h = fnv1a64(prompt, h);
    h = fnv1a64("|", h);
    h = fnv1a64(temp, h);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ScriptedBackend::complete(TemplateId, const std::string& prompt, double) {
    prompts.push_back(prompt);
    if (!queue_.empty()) {
        std::string response = std::move(queue_.front());
        queue_.pop_front();
        return response;
    }
    for (const auto& [needle, response] : rules_)
        if (prompt.find(needle) != std::string::npos) return response;
    throw AgentFailure("scripted backend has no response for this prompt");
}

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw AgentFailure("cannot open transcript: " + file.string());
    std::vector<TranscriptEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("digest") || !j.contains("response"))
            throw AgentFailure("corrupt transcript entry at line " + std::to_string(line_no) +
                               " of " + file.string());
        entries.push_back({j["digest"].get<std::string>(), j["response"].get<std::string>()});
    }
    return entries;
}

ReplayBackend ReplayBackend::from_file(const std::filesystem::path& file) {
    return ReplayBackend(read_transcript(file));
}

std::string ReplayBackend::complete(TemplateId id, const std::string& prompt, double temperature) {
    if (cursor_ >= entries_.size()) throw TranscriptExhaustedError();
    const TranscriptEntry& entry = entries_[cursor_];
    std::string digest = request_digest(id, prompt, temperature);
    if (digest != entry.digest) throw DigestMismatchError(digest, entry.digest);
    ++cursor_;
    return entry.response;
}

RecordingBackend::RecordingBackend(AgentBackend& inner, std::filesystem::path out_file)
    : inner_(inner), out_file_(std::move(out_file)) {
    std::ofstream out(out_file_, std::ios::trunc);  // start a fresh transcript
    if (!out) throw AgentFailure("cannot write transcript: " + out_file_.string());
}

std::string RecordingBackend::complete(TemplateId id, const std::string& prompt,
                                       double temperature) {
    std::string response = inner_.complete(id, prompt, temperature);
    nlohmann::json j = {{"digest", request_digest(id, prompt, temperature)},
                        {"response", response}};
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::ofstream out(out_file_, std::ios::app);
    out << j.dump() << '\n';
    return response;
}

std::string LiveBackend::complete(TemplateId, const std::string& prompt, double temperature) {
    nlohmann::json request = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", temperature}};

    httplib::Client client(config_.base_url);
    client.set_read_timeout(120, 0);
    client.set_connection_timeout(15, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};
    auto response = client.Post(config_.path, headers, request.dump(), "application/json");
    if (!response)
        throw TransportError("request to " + config_.base_url + " failed: " +
                             httplib::to_string(response.error()));
    if (response->status != 200)
        throw TransportError("endpoint returned status " + std::to_string(response->status));

    nlohmann::json body = nlohmann::json::parse(response->body, nullptr, false);
    if (body.is_discarded())
        throw TransportError("endpoint returned malformed JSON");
    try {
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw TransportError("endpoint response missing choices[0].message.content");
    }
}

std::optional<LiveConfig> LiveConfig::from_environment() {
    const char* base = std::getenv("PROGSYN_API_BASE");
    const char* model = std::getenv("PROGSYN_MODEL");
    const char* key = std::getenv("PROGSYN_API_KEY");
    if (!base || !model || !key) return std::nullopt;
    LiveConfig config;
    config.base_url = base;
    config.model = model;
    config.api_key = key;
    if (const char* path = std::getenv("PROGSYN_API_PATH")) config.path = path;
    return config;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    auto read = [&](TemplateId id, const char* file) {
        std::ifstream in(dir / file);
        if (!in) throw std::runtime_error("cannot open template: " + (dir / file).string());
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return PromptTemplate{id, std::move(text)};
    };
    TemplateLibrary lib;
    lib.signature = read(TemplateId::signature, "signature.txt");
    lib.implementation_clevr = read(TemplateId::implementation, "implementation_clevr.txt");
    lib.implementation_omni3d = read(TemplateId::implementation, "implementation_omni3d.txt");
    lib.program_clevr = read(TemplateId::program, "program_clevr.txt");
    lib.program_omni3d = read(TemplateId::program, "program_omni3d.txt");
    return lib;
}

namespace {

std::string retry_suffix(std::string_view unit, const RetryInfo& retry) {
    std::string out = "\n\nYour previous " + std::string(unit) + " failed.\n";
    if (!retry.failed_text.empty())
        out += "Previous " + std::string(unit) + ":\n" + retry.failed_text + "\n";
    out += "Error: " + retry.error_line + "\n";
    out += "Please fix it. Output the " + std::string(unit) + " inside <" + std::string(unit) +
           "></" + std::string(unit) + ">.";
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> ask_signatures(
    const AgentSet& agents, const std::vector<std::string>& questions,
    const ApiRegistry& registry) {
    std::string question_block;
    for (const std::string& q : questions) question_block += q + "\n";
    std::string prompt = render_template(
        agents.templates->signature,
        {{"current_api_signatures", registry.render_api_docstrings(true)},
         {"questions", question_block}});

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response =
            agents.backend->complete(TemplateId::signature, prompt, agents.temperature);
        try {
            std::vector<std::string> docstrings = parse_tagged_blocks(response, "docstring");
            std::vector<std::string> signatures = parse_tagged_blocks(response, "signature");
            std::size_t n = std::min(docstrings.size(), signatures.size());
            std::vector<std::pair<std::string, std::string>> pairs;
            pairs.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                pairs.emplace_back(docstrings[i], signatures[i]);
            return pairs;
        } catch (const MissingTagError&) {
            continue;  // one re-ask
        } catch (const UnbalancedTagsError&) {
            continue;
        }
    }
    return {};
}

std::optional<std::string> ask_implementation(const AgentSet& agents, const ApiRegistry& registry,
                                              const MethodSignature& signature,
                                              const std::optional<RetryInfo>& retry) {
    std::string generated = registry.render_generated_for_implementation(signature.name);
    std::string prompt = render_template(
        agents.templates->implementation(agents.profile),
        {{"pre_defined_signatures", registry.render_api_docstrings(false)},
         {"predef_signatures", registry.render_api_docstrings(false)},
         {"generated_signatures", generated},
         {"docstring", signature.docstring},
         {"signature", signature.def_line()}});
    if (retry) prompt += retry_suffix("implementation", *retry);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response =
            agents.backend->complete(TemplateId::implementation, prompt, agents.temperature);
        try {
            return parse_tagged_blocks(response, "implementation").front();
        } catch (const MissingTagError&) {
            continue;
        } catch (const UnbalancedTagsError&) {
            continue;
        }
    }
    return std::nullopt;
}

std::optional<ProgramResponse> ask_program(const AgentSet& agents, const ApiRegistry& registry,
                                           const std::string& question,
                                           const std::optional<RetryInfo>& retry) {
    std::string prompt = render_template(
        agents.templates->program(agents.profile),
        {{"pre_defined_signatures", registry.render_api_docstrings(false)},
         {"predef_signatures", registry.render_api_docstrings(false)},
         {"api", registry.render_generated_docstrings()},
         {"question", question}});
    if (retry) prompt += retry_suffix("program", *retry);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response =
            agents.backend->complete(TemplateId::program, prompt, agents.temperature);
        try {
            std::string program = parse_tagged_blocks(response, "program").front();
            // plan/chain-of-thought text outside the tags is kept, not parsed
            ProgramResponse out;
            out.program_text = std::move(program);
            auto open = response.find("<program>");
            out.plan_text = trim_copy(std::string_view(response).substr(0, open));
            return out;
        } catch (const MissingTagError&) {
            continue;
        } catch (const UnbalancedTagsError&) {
            continue;
        }
    }
    return std::nullopt;
}

ImplementationProvider make_implementation_provider(const AgentSet& agents,
                                                    const ApiRegistry& registry) {
    return [&agents, &registry](const MethodSignature& signature,
                                const std::optional<RetryInfo>& retry) {
        return ask_implementation(agents, registry, signature, retry);
    };
}

} // namespace progsyn
