#include "progsyn/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "progsyn/rng.hpp"

namespace progsyn {

std::string_view to_word(AnswerType t) {
    switch (t) {
        case AnswerType::numeric_count: return "numeric_count";
        case AnswerType::numeric_other: return "numeric_other";
        case AnswerType::yes_no: return "yes_no";
        case AnswerType::multi_choice: return "multi_choice";
    }
    return "?";
}

AnswerType answer_type_from_word(std::string_view w) {
    if (w == "numeric_count") return AnswerType::numeric_count;
    if (w == "numeric_other") return AnswerType::numeric_other;
    if (w == "yes_no") return AnswerType::yes_no;
    if (w == "multi_choice") return AnswerType::multi_choice;
    throw std::invalid_argument("unknown answer type: " + std::string(w));
}

double mra(double pred, double gt) {
    if (gt == 0.0) throw ZeroGroundTruthError();
    double rel = std::abs(pred - gt) / gt;
    int hits = 0;
    for (int k = 0; k < 10; ++k) {
        double threshold = static_cast<double>(50 + 5 * k) / 100.0;
        if (rel < 1.0 - threshold) ++hits;
    }
    return static_cast<double>(hits) / 10.0;
}

namespace {

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

std::string canonical_text(std::string_view raw) {
    std::string s;
    for (char c : raw) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    const char* punct = " \t\r\n.,!?;:'\"()";
    auto b = s.find_first_not_of(punct);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(punct);
    s = s.substr(b, e - b + 1);
    if (s == "square") return "cube";
    if (s == "squares") return "cubes";
    return s;
}

} // namespace

Normalized normalize_answer(std::string_view raw, AnswerType type) {
    Normalized out;
    std::string text = canonical_text(raw);
    double number = 0.0;
    bool numeric = parse_number(text, number);
    if (type == AnswerType::numeric_count || type == AnswerType::numeric_other) {
        if (!numeric) return out;  // invalid
        out.kind = Normalized::Kind::number;
        out.number = number;
        out.text = format_double(number);
        return out;
    }
    if (numeric) {
        out.kind = Normalized::Kind::number;
        out.number = number;
        out.text = format_double(number);
        return out;
    }
    if (text.empty()) return out;
    out.kind = Normalized::Kind::text;
    out.text = text;
    return out;
}

Normalized normalize_answer(const Value& raw, AnswerType type) {
    switch (raw.kind()) {
        case Value::Kind::boolean:
            return normalize_answer(raw.as_bool() ? "yes" : "no", type);
        case Value::Kind::integer: {
            Normalized out;
            out.kind = Normalized::Kind::number;
            out.number = static_cast<double>(raw.as_int());
            out.text = format_double(out.number);
            return out;
        }
        case Value::Kind::real: {
            Normalized out;
            out.kind = Normalized::Kind::number;
            out.number = raw.as_real();
            out.text = format_double(out.number);
            return out;
        }
        case Value::Kind::string:
            return normalize_answer(std::string_view(raw.as_string()), type);
        default:
            return {};  // none, sequences, images never score
    }
}

ScoreReport score(const std::vector<ResultRecord>& records,
                  const std::vector<BenchmarkItem>& items) {
    std::unordered_map<std::string, const ResultRecord*> by_id;
    for (const ResultRecord& r : records) {
        if (!by_id.emplace(r.item_id, &r).second)
            throw IdMismatchError("duplicate record id: " + r.item_id);
    }
    if (records.size() != items.size())
        throw IdMismatchError("record count " + std::to_string(records.size()) +
                              " does not match item count " + std::to_string(items.size()));

    ScoreReport report;
    struct Tally {
        int count = 0;
        double sum = 0.0;
    };
    std::map<std::string, Tally> tallies;
    double total = 0.0;

    for (const BenchmarkItem& item : items) {
        auto it = by_id.find(item.id);
        if (it == by_id.end()) throw IdMismatchError("no record for item " + item.id);
        const ResultRecord& record = *it->second;

        Normalized expected = normalize_answer(std::string_view(item.answer), item.answer_type);
        double contribution = 0.0;
        std::string predicted_text = "<execution error>";

        if (record.answer) {
            Normalized predicted = normalize_answer(*record.answer, item.answer_type);
            predicted_text = predicted.kind == Normalized::Kind::invalid ? "<unparseable>"
                                                                         : predicted.text;
            if (predicted.kind != Normalized::Kind::invalid &&
                expected.kind != Normalized::Kind::invalid) {
                if (item.answer_type == AnswerType::numeric_other) {
                    try {
                        contribution = mra(predicted.number, expected.number);
                    } catch (const ZeroGroundTruthError&) {
                        contribution = 0.0;
                    }
                } else if (predicted.kind == expected.kind) {
                    bool match = predicted.kind == Normalized::Kind::number
                                     ? predicted.number == expected.number
                                     : predicted.text == expected.text;
                    contribution = match ? 1.0 : 0.0;
                }
            }
        }

        Tally& tally = tallies[std::string(to_word(item.answer_type))];
        ++tally.count;
        tally.sum += contribution;
        total += contribution;
        report.verdicts.push_back({item.id, contribution, predicted_text, expected.text});
    }

    report.item_count = static_cast<int>(items.size());
    report.total = items.empty() ? 0.0 : 100.0 * total / static_cast<double>(items.size());
    for (const auto& [type, tally] : tallies)
        report.per_type[type] = {tally.count,
                                 100.0 * tally.sum / static_cast<double>(tally.count)};
    return report;
}

nlohmann::json report_to_json(const ScoreReport& report) {
    nlohmann::json per_type;
    for (const auto& [type, breakdown] : report.per_type)
        per_type[type] = {{"count", breakdown.count}, {"accuracy", breakdown.accuracy}};
    nlohmann::json verdicts = nlohmann::json::array();
    for (const ItemVerdict& v : report.verdicts)
        verdicts.push_back({{"id", v.id},
                            {"contribution", v.contribution},
                            {"predicted", v.predicted},
                            {"expected", v.expected}});
    return {{"total", report.total},
            {"items", report.item_count},
            {"per_type", std::move(per_type)},
            {"verdicts", std::move(verdicts)}};
}

std::string report_table(const ScoreReport& report) {
    static const std::vector<std::pair<std::string, std::string>> kDisplay = {
        {"numeric_count", "numeric (ct)"},
        {"numeric_other", "numeric (other)"},
        {"yes_no", "y/n"},
        {"multi_choice", "multi-choice"},
    };
    std::ostringstream out;
    char buf[64];
    out << "type               items   accuracy\n";
    for (const auto& [key, label] : kDisplay) {
        auto it = report.per_type.find(key);
        if (it == report.per_type.end()) continue;
        std::snprintf(buf, sizeof(buf), "%-18s %5d %10.1f\n", label.c_str(), it->second.count,
                      it->second.accuracy);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-18s %5d %10.1f\n", "total", report.item_count,
                  report.total);
    out << buf;
    return out.str();
}

std::vector<BenchmarkItem> read_benchmark(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open benchmark file: " + file.string());
    std::vector<BenchmarkItem> items;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        BenchmarkItem item;
        item.id = j.at("id").get<std::string>();
        item.scene_file = j.at("scene").get<std::string>();
        item.question = j.at("question").get<std::string>();
        item.answer = j.at("answer").get<std::string>();
        item.answer_type = answer_type_from_word(j.at("answer_type").get<std::string>());
        items.push_back(std::move(item));
    }
    return items;
}

void write_benchmark(const std::vector<BenchmarkItem>& items, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write benchmark file: " + file.string());
    for (const BenchmarkItem& item : items) {
        nlohmann::json j = {{"id", item.id},
                            {"scene", item.scene_file},
                            {"question", item.question},
                            {"answer", item.answer},
                            {"answer_type", to_word(item.answer_type)}};
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// question generation
// ---------------------------------------------------------------------------

std::string_view relation_phrase(Relation r) {
    switch (r) {
        case Relation::left_of: return "left of";
        case Relation::right_of: return "right of";
        case Relation::in_front_of: return "in front of";
        case Relation::behind: return "behind";
    }
    return "?";
}

bool AttrFilter::matches(const Object3D& o) const {
    if (shape && o.shape != *shape) return false;
    if (color && o.color != *color) return false;
    if (material && o.material != *material) return false;
    if (size && o.size_class != *size) return false;
    return true;
}

std::string AttrFilter::phrase(bool plural) const {
    std::string out;
    auto add = [&](std::string_view w) {
        if (!out.empty()) out += ' ';
        out += w;
    };
    if (size) add(to_word(*size));
    if (color) add(to_word(*color));
    if (material) add(to_word(*material));
    add(shape ? to_word(*shape) : "object");
    if (plural) out += 's';
    return out;
}

namespace {

double projected_u(const Scene& scene, const Object3D& o) {
    return project_center(scene, o.id).u;
}

// a <relation> b, under the same semantics the specialists expose:
// left/right compare projected u, front/behind compare camera-frame z
bool relation_holds(const Scene& scene, const Object3D& a, const Object3D& b, Relation r) {
    switch (r) {
        case Relation::left_of: return projected_u(scene, a) < projected_u(scene, b);
        case Relation::right_of: return projected_u(scene, a) > projected_u(scene, b);
        case Relation::in_front_of: return a.center.z < b.center.z;
        case Relation::behind: return a.center.z > b.center.z;
    }
    return false;
}

int count_matching(const Scene& scene, const AttrFilter& f) {
    int n = 0;
    for (const Object3D& o : scene.objects)
        if (f.matches(o)) ++n;
    return n;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
}

void set_attr(AttrFilter& f, int attr, const Object3D& o) {
    switch (attr) {
        case 0: f.shape = o.shape; break;
        case 1: f.color = o.color; break;
        case 2: f.material = o.material; break;
        case 3: f.size = o.size_class; break;
    }
}

// smallest random attribute set that singles the target out
std::optional<AttrFilter> unique_filter_for(const Scene& scene, const Object3D& target, Rng& rng) {
    std::vector<int> order = {0, 1, 2, 3};
    shuffle(order, rng);
    AttrFilter f;
    for (int attr : order) {
        set_attr(f, attr, target);
        if (count_matching(scene, f) == 1) return f;
    }
    return std::nullopt;
}

AttrFilter random_filter(Rng& rng, int attrs) {
    AttrFilter f;
    std::vector<int> order = {0, 1, 2, 3};
    shuffle(order, rng);
    for (int i = 0; i < attrs; ++i) {
        switch (order[static_cast<std::size_t>(i)]) {
            case 0: f.shape = static_cast<Shape>(rng.uniform_int(0, 2)); break;
            case 1: f.color = static_cast<Color>(rng.uniform_int(0, 7)); break;
            case 2: f.material = static_cast<Material>(rng.uniform_int(0, 1)); break;
            case 3: f.size = static_cast<SizeClass>(rng.uniform_int(0, 1)); break;
        }
    }
    return f;
}

const char* attr_kind_name(int attr) {
    switch (attr) {
        case 0: return "shape";
        case 1: return "color";
        case 2: return "material";
        default: return "size";
    }
}

std::string attr_value_word(const Object3D& o, const std::string& kind) {
    if (kind == "shape") return std::string(to_word(o.shape));
    if (kind == "color") return std::string(to_word(o.color));
    if (kind == "material") return std::string(to_word(o.material));
    return std::string(to_word(o.size_class));
}

bool filter_has_kind(const AttrFilter& f, int attr) {
    switch (attr) {
        case 0: return f.shape.has_value();
        case 1: return f.color.has_value();
        case 2: return f.material.has_value();
        default: return f.size.has_value();
    }
}

const Object3D& pick_object(const Scene& scene, Rng& rng) {
    return scene.objects[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(scene.objects.size()) - 1))];
}

Relation pick_relation(Rng& rng) { return static_cast<Relation>(rng.uniform_int(0, 3)); }

std::optional<ItemBlueprint> draft_item(const Scene& scene, QuestionKind kind, Rng& rng) {
    ItemBlueprint bp;
    bp.kind = kind;

    switch (kind) {
        case QuestionKind::count_by_attributes: {
            bp.referent = random_filter(rng, static_cast<int>(rng.uniform_int(1, 2)));
            int n = count_matching(scene, bp.referent);
            bp.item.question = "How many " + bp.referent.phrase(true) + " are there?";
            bp.item.answer = std::to_string(n);
            bp.item.answer_type = AnswerType::numeric_count;
            return bp;
        }
        case QuestionKind::existence_related: {
            const Object3D& ref = pick_object(scene, rng);
            auto ref_filter = unique_filter_for(scene, ref, rng);
            if (!ref_filter) return std::nullopt;
            bp.referent = *ref_filter;
            bp.subject = random_filter(rng, static_cast<int>(rng.uniform_int(1, 2)));
            bp.relation = pick_relation(rng);
            bool two_hop = rng.uniform_int(0, 1) == 1;
            if (!two_hop) {
                bool exists = false;
                for (const Object3D& o : scene.objects) {
                    if (o.id == ref.id) continue;
                    if (bp.subject.matches(o) && relation_holds(scene, o, ref, *bp.relation))
                        exists = true;
                }
                bp.item.question = "Is there a " + bp.subject.phrase(false) + " " +
                                   std::string(relation_phrase(*bp.relation)) + " the " +
                                   bp.referent.phrase(false) + "?";
                bp.item.answer = exists ? "yes" : "no";
                bp.item.answer_type = AnswerType::yes_no;
                return bp;
            }
            // two hops: the middle referent must be unique within
            // (attribute filter AND relation2 vs the base referent)
            const Object3D& mid = pick_object(scene, rng);
            if (mid.id == ref.id) return std::nullopt;
            bp.relation2 = pick_relation(rng);
            if (!relation_holds(scene, mid, ref, *bp.relation2)) return std::nullopt;
            std::vector<int> order = {0, 1, 2, 3};
            shuffle(order, rng);
            AttrFilter mid_filter;
            bool unique = false;
            for (int attr : order) {
                set_attr(mid_filter, attr, mid);
                int n = 0;
                for (const Object3D& o : scene.objects) {
                    if (o.id == ref.id) continue;
                    if (mid_filter.matches(o) && relation_holds(scene, o, ref, *bp.relation2)) ++n;
                }
                if (n == 1) {
                    unique = true;
                    break;
                }
            }
            if (!unique) return std::nullopt;
            bp.mid = mid_filter;
            bool exists = false;
            for (const Object3D& o : scene.objects) {
                if (o.id == mid.id) continue;
                if (bp.subject.matches(o) && relation_holds(scene, o, mid, *bp.relation))
                    exists = true;
            }
            bp.item.question = "Is there a " + bp.subject.phrase(false) + " " +
                               std::string(relation_phrase(*bp.relation)) + " the " +
                               bp.mid.phrase(false) + " that is " +
                               std::string(relation_phrase(*bp.relation2)) + " the " +
                               bp.referent.phrase(false) + "?";
            bp.item.answer = exists ? "yes" : "no";
            bp.item.answer_type = AnswerType::yes_no;
            return bp;
        }
        case QuestionKind::attribute_of_unique: {
            const Object3D& ref = pick_object(scene, rng);
            auto ref_filter = unique_filter_for(scene, ref, rng);
            if (!ref_filter) return std::nullopt;
            bp.referent = *ref_filter;
            std::vector<int> free_kinds;
            for (int attr = 0; attr < 4; ++attr)
                if (!filter_has_kind(bp.referent, attr)) free_kinds.push_back(attr);
            if (free_kinds.empty()) return std::nullopt;
            bp.attr_kind = attr_kind_name(free_kinds[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(free_kinds.size()) - 1))]);
            bp.item.question =
                "What " + bp.attr_kind + " is the " + bp.referent.phrase(false) + "?";
            bp.item.answer = attr_value_word(ref, bp.attr_kind);
            bp.item.answer_type = AnswerType::multi_choice;
            return bp;
        }
        case QuestionKind::count_same_attribute: {
            const Object3D& ref = pick_object(scene, rng);
            auto ref_filter = unique_filter_for(scene, ref, rng);
            if (!ref_filter) return std::nullopt;
            bp.referent = *ref_filter;
            std::vector<int> free_kinds;
            for (int attr = 0; attr < 4; ++attr)
                if (!filter_has_kind(bp.referent, attr)) free_kinds.push_back(attr);
            if (free_kinds.empty()) return std::nullopt;
            bp.attr_kind = attr_kind_name(free_kinds[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(free_kinds.size()) - 1))]);
            int n = 0;
            for (const Object3D& o : scene.objects) {
                if (o.id == ref.id) continue;
                if (attr_value_word(o, bp.attr_kind) == attr_value_word(ref, bp.attr_kind)) ++n;
            }
            bp.item.question = "How many other objects have the same " + bp.attr_kind +
                               " as the " + bp.referent.phrase(false) + "?";
            bp.item.answer = std::to_string(n);
            bp.item.answer_type = AnswerType::numeric_count;
            return bp;
        }
        case QuestionKind::depth_of_unique: {
            const Object3D& ref = pick_object(scene, rng);
            auto ref_filter = unique_filter_for(scene, ref, rng);
            if (!ref_filter) return std::nullopt;
            bp.referent = *ref_filter;
            bp.item.question = "What is the depth of the " + bp.referent.phrase(false) + "?";
            bp.item.answer = format_double(ground_truth_depth(scene, ref.id));
            bp.item.answer_type = AnswerType::numeric_other;
            return bp;
        }
        case QuestionKind::size2d_of_unique: {
            const Object3D& ref = pick_object(scene, rng);
            auto ref_filter = unique_filter_for(scene, ref, rng);
            if (!ref_filter) return std::nullopt;
            bp.referent = *ref_filter;
            bp.use_height = rng.uniform_int(0, 1) == 1;
            PixelBox box = project_bbox(scene, ref.id);
            double value = bp.use_height ? box.height() : box.width();
            if (value == 0.0) return std::nullopt;
            bp.item.question = std::string("What is the 2D ") +
                               (bp.use_height ? "height" : "width") + " in pixels of the " +
                               bp.referent.phrase(false) + "?";
            bp.item.answer = format_double(value);
            bp.item.answer_type = AnswerType::numeric_other;
            return bp;
        }
        case QuestionKind::hypothetical_scale: {
            const Object3D& a = pick_object(scene, rng);
            const Object3D& b = pick_object(scene, rng);
            if (a.id == b.id) return std::nullopt;
            auto fa = unique_filter_for(scene, a, rng);
            auto fb = unique_filter_for(scene, b, rng);
            if (!fa || !fb) return std::nullopt;
            bp.referent = *fa;  // the object with the given size
            bp.subject = *fb;   // the object being asked about
            bp.use_height = rng.uniform_int(0, 1) == 1;
            // keep both objects near-axis for the asked dimension, so the
            // projected hull is not dominated by side-face parallax and the
            // size-times-depth route stays a faithful estimate
            auto parallax = [&](const Object3D& o) {
                double offset = bp.use_height ? std::abs(o.center.y) : std::abs(o.center.x);
                double dim = bp.use_height ? o.extents.y : o.extents.x;
                return offset * o.extents.z / (dim * o.center.z);
            };
            if (parallax(a) > 0.2 || parallax(b) > 0.2) return std::nullopt;
            bp.given_size = static_cast<double>(rng.uniform_int(2, 20));
            double ext_a = bp.use_height ? a.extents.y : a.extents.x;
            double ext_b = bp.use_height ? b.extents.y : b.extents.x;
            double answer = bp.given_size * ext_b / ext_a;
            if (answer == 0.0) return std::nullopt;
            std::string dim = bp.use_height ? "height" : "width";
            bp.item.question = "If the " + dim + " of the " + bp.referent.phrase(false) + " is " +
                               format_double(bp.given_size) + " meters in 3D, what is the " + dim +
                               " in 3D of the " + bp.subject.phrase(false) + "?";
            bp.item.answer = format_double(answer);
            bp.item.answer_type = AnswerType::numeric_other;
            return bp;
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<ItemBlueprint> generate_items(const Scene& scene, std::string_view scene_file,
                                          std::uint64_t seed, const GenOptions& options) {
    Rng rng(mix64(seed ^ 0x9e3779b97f4a7c15ull));
    std::vector<ItemBlueprint> out;
    std::string stem = std::filesystem::path(std::string(scene_file)).stem().string();

    for (QuestionKind kind : options.kinds) {
        for (int i = 0; i < options.per_kind; ++i) {
            for (int attempt = 0; attempt < options.max_tries; ++attempt) {
                std::optional<ItemBlueprint> bp = draft_item(scene, kind, rng);
                if (!bp) continue;
                // avoid duplicate questions within the scene
                bool duplicate = false;
                for (const ItemBlueprint& prev : out)
                    if (prev.item.question == bp->item.question) duplicate = true;
                if (duplicate) continue;
                bp->item.id = stem + "-q" + std::to_string(out.size());
                bp->item.scene_file = std::string(scene_file);
                out.push_back(std::move(*bp));
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// oracle program writer
// ---------------------------------------------------------------------------

namespace {

struct CodeWriter {
    std::string out;
    int level = 0;

    void line(const std::string& s) {
        for (int i = 0; i < level; ++i) out += "    ";
        out += s;
        out += '\n';
    }

    struct Indent {
        CodeWriter& w;
        explicit Indent(CodeWriter& w) : w(w) { ++w.level; }
        ~Indent() { --w.level; }
    };
};

std::string loc_prompt(const AttrFilter& f) {
    return f.shape ? std::string(to_word(*f.shape)) + "s" : "objects";
}

std::string vqa_expr(const std::string& kind, const std::string& x, const std::string& y) {
    return "vqa(image, 'What " + kind + " is this object?', " + x + ", " + y + ")";
}

// sets ok = 0 unless the object at (x, y) matches the filter; shape is
// skipped when the loc prompt already filtered by it
void emit_attr_checks(CodeWriter& w, const AttrFilter& f, const std::string& var_prefix) {
    int n = 0;
    auto check = [&](const std::string& kind, std::string_view want) {
        std::string var = var_prefix + std::to_string(n++);
        w.line(var + " = " + vqa_expr(kind, "x", "y"));
        w.line("if " + var + " != '" + std::string(want) + "':");
        CodeWriter::Indent in(w);
        w.line("ok = 0");
    };
    if (f.color) check("color", to_word(*f.color));
    if (f.material) check("material", to_word(*f.material));
    if (f.size) check("size", to_word(*f.size));
}

bool is_depth_relation(Relation r) {
    return r == Relation::in_front_of || r == Relation::behind;
}

// sets ok = 0 unless (x, y) stands in the relation to <other>_x/_y
void emit_negated_relation(CodeWriter& w, Relation r, const std::string& other) {
    switch (r) {
        case Relation::left_of:
            w.line("if x >= " + other + "_x:");
            break;
        case Relation::right_of:
            w.line("if x <= " + other + "_x:");
            break;
        case Relation::in_front_of:
            w.line("d = depth(image, x, y)");
            w.line("if d >= " + other + "_d:");
            break;
        case Relation::behind:
            w.line("d = depth(image, x, y)");
            w.line("if d <= " + other + "_d:");
            break;
    }
    CodeWriter::Indent in(w);
    w.line("ok = 0");
}

void emit_scan_prelude(CodeWriter& w, const std::string& prefix) {
    w.line(prefix + "_x = 0.0");
    w.line(prefix + "_y = 0.0");
    w.line(prefix + "_found = 0");
}

// scan loop storing the last match into <prefix>_x/_y and raising the flag
void emit_scan_loop(CodeWriter& w, const AttrFilter& f, const std::string& prefix,
                    const std::vector<std::string>& skip_prefixes,
                    std::optional<std::pair<Relation, std::string>> relation_vs) {
    w.line(prefix + "_pts = loc(image, '" + loc_prompt(f) + "')");
    w.line("for p in " + prefix + "_pts:");
    CodeWriter::Indent loop(w);
    w.line("x, y = p");
    for (const std::string& other : skip_prefixes) {
        w.line("if same_object(image, x, y, " + other + "_x, " + other + "_y):");
        CodeWriter::Indent in(w);
        w.line("continue");
    }
    w.line("ok = 1");
    emit_attr_checks(w, f, prefix + "_a");
    if (relation_vs) emit_negated_relation(w, relation_vs->first, relation_vs->second);
    w.line("if ok == 1:");
    CodeWriter::Indent in(w);
    w.line(prefix + "_x = x");
    w.line(prefix + "_y = y");
    w.line(prefix + "_found = 1");
}

void emit_find_unique(CodeWriter& w, const AttrFilter& f, const std::string& prefix) {
    emit_scan_prelude(w, prefix);
    emit_scan_loop(w, f, prefix, {}, std::nullopt);
}

} // namespace

std::string oracle_program(const ItemBlueprint& bp) {
    CodeWriter w;
    switch (bp.kind) {
        case QuestionKind::count_by_attributes: {
            w.line("count = 0");
            w.line("pts = loc(image, '" + loc_prompt(bp.referent) + "')");
            w.line("for p in pts:");
            {
                CodeWriter::Indent loop(w);
                w.line("x, y = p");
                w.line("ok = 1");
                emit_attr_checks(w, bp.referent, "a");
                w.line("if ok == 1:");
                CodeWriter::Indent in(w);
                w.line("count = count + 1");
            }
            w.line("final_result = count");
            break;
        }
        case QuestionKind::existence_related: {
            emit_find_unique(w, bp.referent, "ref");
            bool two_hop = !bp.mid.empty();
            std::string anchor = two_hop ? "mid" : "ref";
            if (two_hop) {
                emit_scan_prelude(w, "mid");
                w.line("if ref_found == 1:");
                CodeWriter::Indent in(w);
                if (is_depth_relation(*bp.relation2))
                    w.line("ref_d = depth(image, ref_x, ref_y)");
                emit_scan_loop(w, bp.mid, "mid", {"ref"},
                               std::make_pair(*bp.relation2, std::string("ref")));
            }
            w.line("exists = 'no'");
            w.line("if " + anchor + "_found == 1:");
            {
                CodeWriter::Indent in(w);
                if (is_depth_relation(*bp.relation))
                    w.line(anchor + "_d = depth(image, " + anchor + "_x, " + anchor + "_y)");
                w.line("subj_pts = loc(image, '" + loc_prompt(bp.subject) + "')");
                w.line("for p in subj_pts:");
                CodeWriter::Indent loop(w);
                w.line("x, y = p");
                w.line("if same_object(image, x, y, " + anchor + "_x, " + anchor + "_y):");
                {
                    CodeWriter::Indent skip(w);
                    w.line("continue");
                }
                w.line("ok = 1");
                emit_attr_checks(w, bp.subject, "s");
                emit_negated_relation(w, *bp.relation, anchor);
                w.line("if ok == 1:");
                CodeWriter::Indent hit(w);
                w.line("exists = 'yes'");
            }
            w.line("final_result = exists");
            break;
        }
        case QuestionKind::attribute_of_unique: {
            emit_find_unique(w, bp.referent, "ref");
            w.line("result = 'unknown'");
            w.line("if ref_found == 1:");
            {
                CodeWriter::Indent in(w);
                w.line("result = " + vqa_expr(bp.attr_kind, "ref_x", "ref_y"));
            }
            w.line("final_result = result");
            break;
        }
        case QuestionKind::count_same_attribute: {
            emit_find_unique(w, bp.referent, "ref");
            w.line("count = 0");
            w.line("if ref_found == 1:");
            {
                CodeWriter::Indent in(w);
                w.line("ref_attr = " + vqa_expr(bp.attr_kind, "ref_x", "ref_y"));
                w.line("all_pts = loc(image, 'objects')");
                w.line("for p in all_pts:");
                CodeWriter::Indent loop(w);
                w.line("x, y = p");
                w.line("if same_object(image, x, y, ref_x, ref_y):");
                {
                    CodeWriter::Indent skip(w);
                    w.line("continue");
                }
                w.line("attr = " + vqa_expr(bp.attr_kind, "x", "y"));
                w.line("if attr == ref_attr:");
                CodeWriter::Indent hit(w);
                w.line("count = count + 1");
            }
            w.line("final_result = count");
            break;
        }
        case QuestionKind::depth_of_unique: {
            emit_find_unique(w, bp.referent, "ref");
            w.line("result = 0.0");
            w.line("if ref_found == 1:");
            {
                CodeWriter::Indent in(w);
                w.line("result = depth(image, ref_x, ref_y)");
            }
            w.line("final_result = result");
            break;
        }
        case QuestionKind::size2d_of_unique: {
            emit_find_unique(w, bp.referent, "ref");
            w.line("result = 0.0");
            w.line("if ref_found == 1:");
            {
                CodeWriter::Indent in(w);
                w.line("ref_w, ref_h = get_2D_object_size(image, ref_x, ref_y)");
                w.line(std::string("result = ") + (bp.use_height ? "ref_h" : "ref_w"));
            }
            w.line("final_result = result");
            break;
        }
        case QuestionKind::hypothetical_scale: {
            emit_find_unique(w, bp.referent, "base");
            emit_find_unique(w, bp.subject, "target");
            w.line("result = 0.0");
            w.line("if base_found == 1 and target_found == 1:");
            {
                CodeWriter::Indent in(w);
                w.line("base_w, base_h = get_2D_object_size(image, base_x, base_y)");
                w.line("target_w, target_h = get_2D_object_size(image, target_x, target_y)");
                w.line("base_d = depth(image, base_x, base_y)");
                w.line("target_d = depth(image, target_x, target_y)");
                const char* dim = bp.use_height ? "h" : "w";
                w.line(std::string("base_3d = base_") + dim + " * base_d");
                w.line(std::string("target_3d = target_") + dim + " * target_d");
                w.line("result = " + format_double(bp.given_size) + " * target_3d / base_3d");
            }
            w.line("final_result = result");
            break;
        }
    }
    return w.out;
}

// ---------------------------------------------------------------------------
// blueprint serialization and the oracle program source
// ---------------------------------------------------------------------------

namespace {

std::string_view kind_word(QuestionKind k) {
    switch (k) {
        case QuestionKind::count_by_attributes: return "count_by_attributes";
        case QuestionKind::existence_related: return "existence_related";
        case QuestionKind::attribute_of_unique: return "attribute_of_unique";
        case QuestionKind::count_same_attribute: return "count_same_attribute";
        case QuestionKind::depth_of_unique: return "depth_of_unique";
        case QuestionKind::size2d_of_unique: return "size2d_of_unique";
        case QuestionKind::hypothetical_scale: return "hypothetical_scale";
    }
    return "?";
}

QuestionKind kind_from_word(std::string_view w) {
    for (int k = 0; k <= static_cast<int>(QuestionKind::hypothetical_scale); ++k)
        if (w == kind_word(static_cast<QuestionKind>(k))) return static_cast<QuestionKind>(k);
    throw std::invalid_argument("unknown question kind: " + std::string(w));
}

std::string_view relation_word(Relation r) {
    switch (r) {
        case Relation::left_of: return "left_of";
        case Relation::right_of: return "right_of";
        case Relation::in_front_of: return "in_front_of";
        case Relation::behind: return "behind";
    }
    return "?";
}

Relation relation_from_word(std::string_view w) {
    for (int r = 0; r <= static_cast<int>(Relation::behind); ++r)
        if (w == relation_word(static_cast<Relation>(r))) return static_cast<Relation>(r);
    throw std::invalid_argument("unknown relation: " + std::string(w));
}

nlohmann::json filter_to_json(const AttrFilter& f) {
    nlohmann::json j = nlohmann::json::object();
    if (f.shape) j["shape"] = to_word(*f.shape);
    if (f.color) j["color"] = to_word(*f.color);
    if (f.material) j["material"] = to_word(*f.material);
    if (f.size) j["size"] = to_word(*f.size);
    return j;
}

AttrFilter filter_from_json(const nlohmann::json& j) {
    AttrFilter f;
    if (j.contains("shape")) f.shape = shape_from_word(j["shape"].get<std::string>());
    if (j.contains("color")) f.color = color_from_word(j["color"].get<std::string>());
    if (j.contains("material")) f.material = material_from_word(j["material"].get<std::string>());
    if (j.contains("size")) f.size = size_class_from_word(j["size"].get<std::string>());
    return f;
}

} // namespace

nlohmann::json blueprint_to_json(const ItemBlueprint& bp) {
    nlohmann::json j = {{"id", bp.item.id},
                        {"scene", bp.item.scene_file},
                        {"question", bp.item.question},
                        {"answer", bp.item.answer},
                        {"answer_type", to_word(bp.item.answer_type)},
                        {"kind", kind_word(bp.kind)},
                        {"referent", filter_to_json(bp.referent)},
                        {"subject", filter_to_json(bp.subject)},
                        {"mid", filter_to_json(bp.mid)},
                        {"attr_kind", bp.attr_kind},
                        {"use_height", bp.use_height},
                        {"given_size", bp.given_size}};
    if (bp.relation) j["relation"] = relation_word(*bp.relation);
    if (bp.relation2) j["relation2"] = relation_word(*bp.relation2);
    return j;
}

ItemBlueprint blueprint_from_json(const nlohmann::json& j) {
    ItemBlueprint bp;
    bp.item.id = j.at("id").get<std::string>();
    bp.item.scene_file = j.at("scene").get<std::string>();
    bp.item.question = j.at("question").get<std::string>();
    bp.item.answer = j.at("answer").get<std::string>();
    bp.item.answer_type = answer_type_from_word(j.at("answer_type").get<std::string>());
    bp.kind = kind_from_word(j.at("kind").get<std::string>());
    bp.referent = filter_from_json(j.at("referent"));
    bp.subject = filter_from_json(j.at("subject"));
    bp.mid = filter_from_json(j.at("mid"));
    bp.attr_kind = j.value("attr_kind", "");
    bp.use_height = j.value("use_height", false);
    bp.given_size = j.value("given_size", 0.0);
    if (j.contains("relation")) bp.relation = relation_from_word(j["relation"].get<std::string>());
    if (j.contains("relation2"))
        bp.relation2 = relation_from_word(j["relation2"].get<std::string>());
    return bp;
}

void write_blueprints(const std::vector<ItemBlueprint>& bps, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write blueprints file: " + file.string());
    for (const ItemBlueprint& bp : bps) out << blueprint_to_json(bp).dump() << '\n';
}

std::vector<ItemBlueprint> read_blueprints(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open blueprints file: " + file.string());
    std::vector<ItemBlueprint> bps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        bps.push_back(blueprint_from_json(nlohmann::json::parse(line)));
    }
    return bps;
}

OracleProgramBackend::OracleProgramBackend(const std::vector<ItemBlueprint>& blueprints) {
    for (const ItemBlueprint& bp : blueprints)
        programs_by_question_[bp.item.question] = oracle_program(bp);
}

std::string OracleProgramBackend::complete(TemplateId, const std::string& prompt, double) {
    std::vector<std::string> questions;
    try {
        questions = parse_tagged_blocks(prompt, "question");
    } catch (const std::exception&) {
        throw AgentFailure("oracle program source received a prompt without a question tag");
    }
    auto it = programs_by_question_.find(questions.front());
    if (it == programs_by_question_.end())
        throw AgentFailure("oracle program source has no program for: " + questions.front());
    return "<program>\n" + it->second + "</program>\n";
}

ResultRecord oracle_execute(const BenchmarkItem& item, const std::string& program_text,
                            std::shared_ptr<const Scene> scene, const SuiteOptions& options) {
    ResultRecord record;
    record.item_id = item.id;
    record.attempts = 1;
    record.program_texts.push_back(program_text);
    SpecialistSuite suite(std::move(scene), options);
    try {
        Program program = parse_program(program_text);
        ExecutionResult result = execute_program(program, nullptr, suite);
        record.answer = result.final_result;
        record.trace = std::move(result.trace);
    } catch (const RuntimeError& e) {
        record.execution_error = e.render();
    }
    record.attempt_trace_lines.push_back(static_cast<int>(record.trace.entries.size()));
    return record;
}

} // namespace progsyn
