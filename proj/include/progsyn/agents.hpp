#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "progsyn/registry.hpp"

namespace progsyn {

struct UnboundPlaceholderError : std::runtime_error {
    explicit UnboundPlaceholderError(const std::string& name)
        : std::runtime_error("unbound template placeholder: {" + name + "}") {}
};
struct MissingTagError : std::runtime_error {
    explicit MissingTagError(const std::string& tag)
        : std::runtime_error("no <" + tag + "> block in agent output") {}
};
struct UnbalancedTagsError : std::runtime_error {
    explicit UnbalancedTagsError(const std::string& tag)
        : std::runtime_error("unbalanced <" + tag + "> tags in agent output") {}
};
struct TransportError : AgentFailure {
    using AgentFailure::AgentFailure;
};
struct TranscriptExhaustedError : AgentFailure {
    TranscriptExhaustedError() : AgentFailure("transcript exhausted") {}
};
struct DigestMismatchError : AgentFailure {
    DigestMismatchError(const std::string& want, const std::string& got)
        : AgentFailure("transcript digest mismatch: expected " + want + ", transcript has " + got) {}
};

enum class TemplateId { signature, implementation, program };

std::string_view to_word(TemplateId id);

struct PromptTemplate {
    TemplateId id = TemplateId::signature;
    std::string text;
};

// Exact python-format-style substitution: {name} is replaced from bindings,
// {{ and }} are literal braces. Unbound or stray placeholders fail loudly.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

// All non-overlapping <tag>...</tag> payloads in order, whitespace-trimmed.
std::vector<std::string> parse_tagged_blocks(const std::string& text, std::string_view tag);

// Digest of (template id, rendered prompt, temperature); recorded next to
// every transcript entry so replays catch prompt drift.
std::string request_digest(TemplateId id, const std::string& prompt, double temperature);

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual std::string complete(TemplateId id, const std::string& prompt, double temperature) = 0;
};

// Test backend. Responses come from an explicit queue first, then from
// substring rules; every prompt is recorded for assertions.
class ScriptedBackend : public AgentBackend {
public:
    void enqueue(std::string response) { queue_.push_back(std::move(response)); }
    void add_rule(std::string substring, std::string response) {
        rules_.emplace_back(std::move(substring), std::move(response));
    }
    std::string complete(TemplateId id, const std::string& prompt, double temperature) override;

    std::vector<std::string> prompts;

private:
    std::deque<std::string> queue_;
    std::vector<std::pair<std::string, std::string>> rules_;
};

struct TranscriptEntry {
    std::string digest;
    std::string response;
};

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& file);

// Replays a recorded transcript in order; zero network activity. A digest
// mismatch means the prompts drifted from the recording and is an error.
class ReplayBackend : public AgentBackend {
public:
    explicit ReplayBackend(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}
    static ReplayBackend from_file(const std::filesystem::path& file);
    std::string complete(TemplateId id, const std::string& prompt, double temperature) override;
    std::size_t cursor() const { return cursor_; }

private:
    std::vector<TranscriptEntry> entries_;
    std::size_t cursor_ = 0;
};

// Tees (digest, response) pairs to a JSONL file while delegating to the
// wrapped backend, producing a transcript that ReplayBackend accepts.
// Entries are written in completion order, serialized across threads.
class RecordingBackend : public AgentBackend {
public:
    RecordingBackend(AgentBackend& inner, std::filesystem::path out_file);
    std::string complete(TemplateId id, const std::string& prompt, double temperature) override;

private:
    AgentBackend& inner_;
    std::filesystem::path out_file_;
    std::mutex write_mutex_;
};

struct LiveConfig {
    std::string base_url;  // e.g. https://api.example.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;

    // reads PROGSYN_API_BASE / PROGSYN_MODEL / PROGSYN_API_KEY (and
    // optionally PROGSYN_API_PATH); returns nullopt when not configured
    static std::optional<LiveConfig> from_environment();
};

// Chat-completion HTTP client: POSTs {model, messages, temperature} and
// reads choices[0].message.content. Credentials never reach logs.
class LiveBackend : public AgentBackend {
public:
    explicit LiveBackend(LiveConfig config) : config_(std::move(config)) {}
    std::string complete(TemplateId id, const std::string& prompt, double temperature) override;

private:
    LiveConfig config_;
};

struct TemplateLibrary {
    PromptTemplate signature;
    PromptTemplate implementation_clevr;
    PromptTemplate implementation_omni3d;
    PromptTemplate program_clevr;
    PromptTemplate program_omni3d;

    static TemplateLibrary load(const std::filesystem::path& dir);

    const PromptTemplate& implementation(ApiProfile profile) const {
        return profile == ApiProfile::clevr ? implementation_clevr : implementation_omni3d;
    }
    const PromptTemplate& program(ApiProfile profile) const {
        return profile == ApiProfile::clevr ? program_clevr : program_omni3d;
    }
};

// Everything an ask_* call needs: backend, templates, sampling temperature,
// and which prompt variant to use.
struct AgentSet {
    AgentBackend* backend = nullptr;
    const TemplateLibrary* templates = nullptr;
    double temperature = 0.7;
    ApiProfile profile = ApiProfile::clevr;
};

// Renders the signature prompt for a question batch, completes, and parses
// (docstring, signature) pairs. On missing tags, re-asks once and then
// returns an empty list.
std::vector<std::pair<std::string, std::string>> ask_signatures(
    const AgentSet& agents, const std::vector<std::string>& questions, const ApiRegistry& registry);

// Renders the implementation prompt (weak-ICL examples live in the template
// text), appending the prior error and failed body on retries. Returns the
// <implementation> payload, or nullopt when the agent output stayed
// unusable after one re-ask.
std::optional<std::string> ask_implementation(const AgentSet& agents, const ApiRegistry& registry,
                                              const MethodSignature& signature,
                                              const std::optional<RetryInfo>& retry);

struct ProgramResponse {
    std::string program_text;  // <program> payload
    std::string plan_text;     // text outside the tags, kept for the record
};

std::optional<ProgramResponse> ask_program(const AgentSet& agents, const ApiRegistry& registry,
                                           const std::string& question,
                                           const std::optional<RetryInfo>& retry);

// The implementation provider used by the API build: wraps ask_implementation.
ImplementationProvider make_implementation_provider(const AgentSet& agents,
                                                    const ApiRegistry& registry);

} // namespace progsyn
