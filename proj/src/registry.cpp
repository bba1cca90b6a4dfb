#include "progsyn/registry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace progsyn {

std::string_view to_word(SemType t) {
    switch (t) {
        case SemType::image: return "image";
        case SemType::integer: return "int";
        case SemType::real: return "float";
        case SemType::string: return "string";
        case SemType::list: return "list";
        case SemType::tuple: return "tuple";
    }
    return "?";
}

SemType sem_type_from_word(std::string_view w) {
    if (w == "image") return SemType::image;
    if (w == "int" || w == "integer") return SemType::integer;
    if (w == "float" || w == "real" || w == "number") return SemType::real;
    if (w == "string" || w == "str") return SemType::string;
    if (w == "list") return SemType::list;
    if (w == "tuple") return SemType::tuple;
    throw std::invalid_argument("unknown semantic type: " + std::string(w));
}

std::string_view to_word(MethodStatus s) {
    switch (s) {
        case MethodStatus::pending: return "pending";
        case MethodStatus::implemented: return "implemented";
        case MethodStatus::dropped: return "dropped";
    }
    return "?";
}

MethodStatus method_status_from_word(std::string_view w) {
    if (w == "pending") return MethodStatus::pending;
    if (w == "implemented") return MethodStatus::implemented;
    if (w == "dropped") return MethodStatus::dropped;
    throw std::invalid_argument("unknown method status: " + std::string(w));
}

std::string MethodSignature::def_line() const {
    std::string out = "def " + name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].name;
    }
    out += "):";
    return out;
}

std::vector<std::string> MethodSignature::param_names() const {
    std::vector<std::string> out;
    out.reserve(params.size());
    for (const Param& p : params) out.push_back(p.name);
    return out;
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

// look up "param (type" in the docstring Args section
std::optional<SemType> type_from_docstring(const std::string& doc, const std::string& param) {
    std::string needle = param + " (";
    auto pos = doc.find(needle);
    if (pos == std::string::npos) return std::nullopt;
    auto start = pos + needle.size();
    auto end = doc.find_first_of("):", start);
    if (end == std::string::npos) return std::nullopt;
    std::string word;
    for (char c : doc.substr(start, end - start))
        if (!std::isspace(static_cast<unsigned char>(c)))
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    try {
        return sem_type_from_word(word);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

SemType fallback_type(const std::string& param) {
    if (param == "image" || param == "img") return SemType::image;
    if (param.find("prompt") != std::string::npos || param.find("question") != std::string::npos ||
        param.find("attribute") != std::string::npos || param.find("word") != std::string::npos)
        return SemType::string;
    return SemType::integer;
}

std::string compose_block(const std::string& docstring, const std::string& def_line) {
    std::string block = docstring;
    while (!block.empty() && std::isspace(static_cast<unsigned char>(block.back())))
        block.pop_back();
    block += "\n" + def_line + "\n";
    return block;
}

} // namespace

MethodSignature parse_signature(const std::string& docstring, const std::string& signature_text) {
    std::string doc = trim(docstring);
    if (doc.empty()) throw std::invalid_argument("empty docstring");

    std::string sig = trim(signature_text);
    if (sig.rfind("def ", 0) != 0)
        throw std::invalid_argument("signature must start with 'def': " + sig);
    auto open = sig.find('(');
    auto close = sig.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("signature missing parameter list: " + sig);

    MethodSignature out;
    out.name = trim(sig.substr(4, open - 4));
    if (!valid_name(out.name))
        throw std::invalid_argument("invalid method name: '" + out.name + "'");

    std::string tail = trim(sig.substr(close + 1));
    if (tail != ":" && !tail.empty())
        throw std::invalid_argument("unexpected text after parameter list: " + sig);

    std::string params = sig.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    while (start <= params.size()) {
        auto comma = params.find(',', start);
        std::string piece = trim(params.substr(start, comma == std::string::npos
                                                           ? std::string::npos
                                                           : comma - start));
        if (!piece.empty()) {
            // tolerate "name: type" and "name=default" shapes by keeping the name
            auto cut = piece.find_first_of(":=");
            std::string pname = trim(cut == std::string::npos ? piece : piece.substr(0, cut));
            if (!valid_name(pname))
                throw std::invalid_argument("invalid parameter name: '" + pname + "'");
            Param p;
            p.name = pname;
            p.type = type_from_docstring(doc, pname).value_or(fallback_type(pname));
            out.params.push_back(std::move(p));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }

    out.docstring = doc;
    return out;
}

ApiRegistry::ApiRegistry(ApiProfile profile) : profile_(profile) {}

ApiRegistry::AddOutcome ApiRegistry::add_signatures(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    AddOutcome outcome;
    for (const auto& [docstring, signature_text] : pairs) {
        MethodSignature sig;
        try {
            sig = parse_signature(docstring, signature_text);
            if (sig.name.front() != '_')
                throw std::invalid_argument("generated method names must start with an underscore: '" +
                                            sig.name + "'");
        } catch (const std::invalid_argument& e) {
            outcome.malformed.push_back(e.what());
            continue;
        }
        if (is_predefined_name(sig.name) || index_.count(sig.name)) continue;  // duplicate
        index_.emplace(sig.name, generated_.size());
        ApiMethod method;
        method.signature = std::move(sig);
        generated_.push_back(std::move(method));
        ++outcome.accepted;
    }
    return outcome;
}

bool ApiRegistry::on_stack(const std::string& name) const {
    return std::find(implementation_stack_.begin(), implementation_stack_.end(), name) !=
           implementation_stack_.end();
}

std::vector<std::string> ApiRegistry::cycle_members(const std::string& from) const {
    auto it = std::find(implementation_stack_.begin(), implementation_stack_.end(), from);
    return {it, implementation_stack_.end()};
}

void ApiRegistry::drop(ApiMethod& method, const std::string& reason, BuildReport& report) {
    if (method.status == MethodStatus::dropped) return;
    method.status = MethodStatus::dropped;
    method.drop_reason = reason;
    report.dropped.push_back(method.signature.name);
}

ApiRegistry::BuildReport ApiRegistry::implement_all(const ImplementationProvider& provider,
                                                    const SpecialistSuite& placeholder,
                                                    const Limits& limits) {
    BuildReport report;
    try {
        for (std::size_t i = 0; i < generated_.size(); ++i)
            if (generated_[i].status == MethodStatus::pending)
                implement(i, provider, placeholder, limits, report);
    } catch (...) {
        implementation_stack_.clear();
        throw;
    }
    implementation_stack_.clear();
    return report;
}

ApiRegistry::Outcome ApiRegistry::implement(std::size_t index,
                                            const ImplementationProvider& provider,
                                            const SpecialistSuite& suite, const Limits& limits,
                                            BuildReport& report) {
    ApiMethod& m = generated_[index];
    implementation_stack_.push_back(m.signature.name);

    auto finish = [&](Outcome outcome) {
        implementation_stack_.pop_back();
        return outcome;
    };

    std::optional<RetryInfo> retry;
    bool need_ask = true;

    while (m.error_count < kErrorBudget) {
        if (need_ask) {
            ++report.agent_calls;
            std::optional<std::string> text = provider(m.signature, retry);
            if (!text) {
                ++m.error_count;
                retry = RetryInfo{"agent output did not contain an implementation block",
                                  m.body_text};
                continue;
            }
            m.body_text = *text;
            try {
                m.body = parse_method_body(m.body_text, m.signature.param_names());
            } catch (const RuntimeError& e) {
                m.body.reset();
                ++m.error_count;
                retry = RetryInfo{e.render(), m.body_text};
                continue;
            }
        }

        std::optional<RuntimeError> err = test_run(m, *this, suite, limits);
        if (!err) {
            m.status = MethodStatus::implemented;
            report.implemented.push_back(m.signature.name);
            return finish(Outcome::implemented);
        }

        if (err->kind == ErrorKind::UndefinedMethod) {
            const std::string& undefined = err->detail;
            const ApiMethod* dep = find_generated(undefined);
            if (dep && dep->status == MethodStatus::pending) {
                if (on_stack(undefined)) {
                    // the dependency is currently mid-implementation: a cycle
                    std::vector<std::string> members = cycle_members(undefined);
                    std::vector<std::string> key = members;
                    std::sort(key.begin(), key.end());
                    int& attempts = cycle_attempts_[key];
                    if (++attempts >= kErrorBudget) {
                        for (const std::string& name : members)
                            drop(generated_[index_.at(name)], "dependency cycle", report);
                        return finish(Outcome::dropped);
                    }
                    ++m.error_count;
                    retry = RetryInfo{err->render() + " (part of a dependency cycle)",
                                      m.body_text};
                    need_ask = true;
                    continue;
                }
                // depth-first: implement the dependency, then retry the same
                // body; the detour costs one unit of this method's budget
                ++m.error_count;
                implement(index_.at(undefined), provider, suite, limits, report);
                if (m.status == MethodStatus::dropped)
                    return finish(Outcome::dropped);  // removed as part of a cycle
                need_ask = false;
                retry.reset();
                continue;
            }
        }

        ++m.error_count;
        retry = RetryInfo{err->render(), m.body_text};
        need_ask = true;
    }

    if (m.status == MethodStatus::pending) drop(m, "error budget exhausted", report);
    return finish(Outcome::dropped);
}

std::string ApiRegistry::render_api_docstrings(bool include_generated) const {
    std::string out = render_predefined_docstrings(profile_);
    if (!include_generated) return out;
    for (const ApiMethod& m : generated_) {
        if (m.status != MethodStatus::implemented) continue;
        out += "\n" + compose_block(m.signature.docstring, m.signature.def_line());
    }
    return out;
}

std::string ApiRegistry::render_generated_docstrings() const {
    std::string out;
    bool first = true;
    for (const ApiMethod& m : generated_) {
        if (m.status != MethodStatus::implemented) continue;
        if (!first) out += "\n";
        first = false;
        out += compose_block(m.signature.docstring, m.signature.def_line());
    }
    return out;
}

std::string ApiRegistry::render_generated_for_implementation(std::string_view exclude_name) const {
    std::string out;
    bool first = true;
    for (const ApiMethod& m : generated_) {
        if (m.status == MethodStatus::dropped || m.signature.name == exclude_name) continue;
        if (!first) out += "\n";
        first = false;
        out += compose_block(m.signature.docstring, m.signature.def_line());
    }
    return out;
}

const ApiMethod* ApiRegistry::find_generated(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &generated_[it->second];
}

std::optional<MethodView> ApiRegistry::resolve_method(const std::string& name) const {
    const ApiMethod* m = find_generated(name);
    if (!m || m->status != MethodStatus::implemented || !m->body) return std::nullopt;
    return MethodView{&m->body->params, &*m->body};
}

nlohmann::json ApiRegistry::to_snapshot() const {
    nlohmann::json generated = nlohmann::json::array();
    for (const ApiMethod& m : generated_) {
        nlohmann::json params = nlohmann::json::array();
        for (const Param& p : m.signature.params)
            params.push_back({{"name", p.name}, {"type", to_word(p.type)}});
        generated.push_back({{"name", m.signature.name},
                             {"docstring", m.signature.docstring},
                             {"params", std::move(params)},
                             {"body_text", m.body_text},
                             {"status", to_word(m.status)},
                             {"error_count", m.error_count},
                             {"drop_reason", m.drop_reason}});
    }
    return {{"generated", std::move(generated)}};
}

ApiRegistry ApiRegistry::from_snapshot(const nlohmann::json& j, ApiProfile profile) {
    ApiRegistry registry(profile);
    for (const auto& jm : j.at("generated")) {
        ApiMethod m;
        m.signature.name = jm.at("name").get<std::string>();
        m.signature.docstring = jm.at("docstring").get<std::string>();
        for (const auto& jp : jm.at("params"))
            m.signature.params.push_back(
                {jp.at("name").get<std::string>(), sem_type_from_word(jp.at("type").get<std::string>())});
        m.body_text = jm.at("body_text").get<std::string>();
        m.status = method_status_from_word(jm.at("status").get<std::string>());
        m.error_count = jm.at("error_count").get<int>();
        m.drop_reason = jm.value("drop_reason", "");
        if (m.status == MethodStatus::implemented)
            m.body = parse_method_body(m.body_text, m.signature.param_names());
        registry.index_.emplace(m.signature.name, registry.generated_.size());
        registry.generated_.push_back(std::move(m));
    }
    return registry;
}

void ApiRegistry::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write registry snapshot: " + file.string());
    out << to_snapshot().dump(2) << '\n';
}

ApiRegistry ApiRegistry::load(const std::filesystem::path& file, ApiProfile profile) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open registry snapshot: " + file.string());
    nlohmann::json j;
    in >> j;
    return from_snapshot(j, profile);
}

std::optional<RuntimeError> test_run(const ApiMethod& method, const ApiRegistry& registry,
                                     const SpecialistSuite& placeholder_suite,
                                     const Limits& limits) {
    if (!method.body)
        return RuntimeError(ErrorKind::SyntaxError, 1, "method body is not parsed");
    std::vector<Value> args;
    args.reserve(method.signature.params.size());
    for (const Param& p : method.signature.params) {
        switch (p.type) {
            case SemType::image: args.push_back(Value::image({&placeholder_suite})); break;
            case SemType::integer: args.push_back(Value::integer(1)); break;
            case SemType::real: args.push_back(Value::real(1.0)); break;
            case SemType::string: args.push_back(Value::str("red")); break;
            case SemType::list: args.push_back(Value::list({})); break;
            case SemType::tuple:
                args.push_back(Value::tuple({Value::integer(1), Value::integer(1)}));
                break;
        }
    }
    try {
        call_method_with_values(*method.body, args, &registry, placeholder_suite, limits);
    } catch (const RuntimeError& e) {
        return e;
    }
    return std::nullopt;
}

const SpecialistSuite& placeholder_suite() {
    static const SpecialistSuite suite = [] {
        auto scene = std::make_shared<Scene>();
        scene->camera = Camera{100.0, 160.0, 120.0, 320, 240};
        Object3D a;
        a.id = 0;
        a.shape = Shape::cube;
        a.color = Color::red;
        a.material = Material::rubber;
        a.size_class = SizeClass::small;
        a.center = {-0.5, 0.0, 4.0};
        a.extents = {0.4, 0.4, 0.4};
        Object3D b;
        b.id = 1;
        b.shape = Shape::sphere;
        b.color = Color::blue;
        b.material = Material::metal;
        b.size_class = SizeClass::large;
        b.center = {0.5, 0.2, 6.0};
        b.extents = {0.8, 0.8, 0.8};
        scene->objects = {a, b};
        validate_scene(*scene);
        SuiteOptions opts;
        opts.lenient_resolve = true;
        return SpecialistSuite(std::shared_ptr<const Scene>(scene), opts);
    }();
    return suite;
}

} // namespace progsyn
