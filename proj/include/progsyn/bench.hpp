#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsyn/agents.hpp"
#include "progsyn/scene.hpp"
#include "progsyn/synthesis.hpp"

namespace progsyn {

struct ZeroGroundTruthError : std::runtime_error {
    ZeroGroundTruthError() : std::runtime_error("relative accuracy is undefined for gt = 0") {}
};
struct IdMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AnswerType { numeric_count, numeric_other, yes_no, multi_choice };

std::string_view to_word(AnswerType t);
AnswerType answer_type_from_word(std::string_view w);

struct BenchmarkItem {
    std::string id;
    std::string scene_file;  // relative to the benchmark file
    std::string question;
    std::string answer;  // canonical ground-truth string
    AnswerType answer_type = AnswerType::yes_no;
};

// Mean relative accuracy over thresholds 0.50, 0.55, ..., 0.95: the mean of
// the strict indicator |pred - gt| / gt < 1 - threshold.
double mra(double pred, double gt);

struct Normalized {
    enum class Kind { text, number, invalid };
    Kind kind = Kind::invalid;
    std::string text;
    double number = 0.0;
};

// Lowercases, strips surrounding punctuation, maps booleans to yes/no,
// parses numerals ("3", "3.0", "3.00" all mean 3.0), and aliases "square"
// to "cube". Never throws; unparseable numerics come back invalid.
Normalized normalize_answer(const Value& raw, AnswerType type);
Normalized normalize_answer(std::string_view raw, AnswerType type);

struct ItemVerdict {
    std::string id;
    double contribution = 0.0;  // 0..1; MRA value for numeric_other items
    std::string predicted;
    std::string expected;
};

struct TypeBreakdown {
    int count = 0;
    double accuracy = 0.0;  // percent
};

struct ScoreReport {
    double total = 0.0;  // percent, weighted by item count
    int item_count = 0;
    std::map<std::string, TypeBreakdown> per_type;
    std::vector<ItemVerdict> verdicts;
};

// Exact match after normalization for counts, yes/no, and multi-choice;
// numeric_other items contribute their MRA. Execution errors score 0.
// Records and items must align by id.
ScoreReport score(const std::vector<ResultRecord>& records,
                  const std::vector<BenchmarkItem>& items);

nlohmann::json report_to_json(const ScoreReport& report);
std::string report_table(const ScoreReport& report);

std::vector<BenchmarkItem> read_benchmark(const std::filesystem::path& file);
void write_benchmark(const std::vector<BenchmarkItem>& items, const std::filesystem::path& file);

// ---- templated question generation over scene annotations ----

enum class QuestionKind {
    count_by_attributes,
    existence_related,      // 1-2 relation hops
    attribute_of_unique,
    count_same_attribute,   // excludes the referent
    depth_of_unique,        // numeric_other
    size2d_of_unique,       // numeric_other
    hypothetical_scale,     // numeric_other, image-space size reasoning
};

enum class Relation { left_of, right_of, in_front_of, behind };

std::string_view relation_phrase(Relation r);

struct AttrFilter {
    std::optional<Shape> shape;
    std::optional<Color> color;
    std::optional<Material> material;
    std::optional<SizeClass> size;

    bool matches(const Object3D& o) const;
    // "small red metal cube" / "red objects"; plural on request
    std::string phrase(bool plural) const;
    bool empty() const { return !shape && !color && !material && !size; }
};

// Everything needed to re-derive the item's correct program.
struct ItemBlueprint {
    BenchmarkItem item;
    QuestionKind kind = QuestionKind::count_by_attributes;
    AttrFilter referent;  // unique referent, or the counting filter
    AttrFilter subject;   // existence subject
    AttrFilter mid;       // middle referent of 2-hop existence questions
    std::optional<Relation> relation;   // subject vs (mid or referent)
    std::optional<Relation> relation2;  // mid vs referent
    std::string attr_kind;  // color | material | shape | size
    bool use_height = false;            // size questions: height instead of width
    double given_size = 0.0;            // hypothetical reference size, meters
};

struct GenOptions {
    std::vector<QuestionKind> kinds = {
        QuestionKind::count_by_attributes, QuestionKind::existence_related,
        QuestionKind::attribute_of_unique, QuestionKind::count_same_attribute,
        QuestionKind::depth_of_unique,     QuestionKind::size2d_of_unique,
    };
    int per_kind = 1;
    int max_tries = 200;  // sampling attempts per requested item
};

// Instantiates question templates against the scene and computes ground
// truth by exhaustive evaluation over the annotations. Drafts whose
// referent is not unique are discarded, so fewer items than requested may
// come back.
std::vector<ItemBlueprint> generate_items(const Scene& scene, std::string_view scene_file,
                                          std::uint64_t seed, const GenOptions& options = {});

// The machine-written program that answers the blueprint's question through
// the five specialists alone. Hypothetical-scale items use the image-space
// size-times-depth route.
std::string oracle_program(const ItemBlueprint& blueprint);

nlohmann::json blueprint_to_json(const ItemBlueprint& bp);
ItemBlueprint blueprint_from_json(const nlohmann::json& j);
void write_blueprints(const std::vector<ItemBlueprint>& bps, const std::filesystem::path& file);
std::vector<ItemBlueprint> read_blueprints(const std::filesystem::path& file);

// Answers every program request with the blueprint-derived correct program,
// matching requests to items by the question inside <question> tags. This
// is the oracle-execution protocol's program source.
class OracleProgramBackend : public AgentBackend {
public:
    explicit OracleProgramBackend(const std::vector<ItemBlueprint>& blueprints);
    std::string complete(TemplateId id, const std::string& prompt, double temperature) override;

private:
    std::map<std::string, std::string> programs_by_question_;
};

// Executes a single program against the item's scene with an oracle (or
// perturbed) suite and returns the record.
ResultRecord oracle_execute(const BenchmarkItem& item, const std::string& program_text,
                            std::shared_ptr<const Scene> scene, const SuiteOptions& options = {});

} // namespace progsyn
