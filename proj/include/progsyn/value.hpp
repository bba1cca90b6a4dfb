#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace progsyn {

class SpecialistSuite;
class Value;

// Opaque binding of the scene-backed specialist suite; programs can pass it
// around and hand it to specialists but cannot look inside.
struct ImageHandle {
    const SpecialistSuite* suite = nullptr;
};

// Tagged runtime value of the synthesis language. Lists have reference
// semantics and are mutable within a run; tuples are immutable.
class Value {
public:
    enum class Kind { none, boolean, integer, real, string, list, tuple, image };

    using List = std::vector<Value>;

    Value() : v_(std::monostate{}) {}

    static Value none() { return Value(); }
    static Value boolean(bool b) { return Value(Repr(b)); }
    static Value integer(std::int64_t i) { return Value(Repr(i)); }
    static Value real(double d) { return Value(Repr(d)); }
    static Value str(std::string s) { return Value(Repr(std::move(s))); }
    static Value list(List items) { return Value(Repr(std::make_shared<List>(std::move(items)))); }
    static Value tuple(List items) {
        return Value(Repr(std::shared_ptr<const List>(std::make_shared<List>(std::move(items)))));
    }
    static Value image(ImageHandle h) { return Value(Repr(h)); }

    Kind kind() const { return static_cast<Kind>(v_.index()); }
    bool is_none() const { return kind() == Kind::none; }
    bool is_number() const { return kind() == Kind::integer || kind() == Kind::real; }
    bool is_sequence() const { return kind() == Kind::list || kind() == Kind::tuple; }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_real() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    ImageHandle as_image() const { return std::get<ImageHandle>(v_); }

    // numeric coercion: integer or real -> double (booleans excluded)
    double as_number() const {
        return kind() == Kind::integer ? static_cast<double>(as_int()) : as_real();
    }

    List& list_items() { return *std::get<std::shared_ptr<List>>(v_); }
    const List& sequence_items() const {
        if (kind() == Kind::list) return *std::get<std::shared_ptr<List>>(v_);
        return *std::get<std::shared_ptr<const List>>(v_);
    }

    bool truthy() const;
    // Python-style equality: numeric cross-type comparison (bool counts as
    // 0/1), elementwise for sequences, false across unrelated kinds.
    bool equals(const Value& other) const;
    // stable display form used in traces and answers
    std::string repr() const;

    static std::string_view kind_name(Kind k);

private:
    using Repr = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                              std::shared_ptr<List>, std::shared_ptr<const List>, ImageHandle>;
    explicit Value(Repr v) : v_(std::move(v)) {}
    Repr v_;
};

} // namespace progsyn
