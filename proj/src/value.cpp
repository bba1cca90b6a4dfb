#include "progsyn/value.hpp"

#include <charconv>

namespace progsyn {

namespace {

std::string real_repr(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    // keep reals visually distinct from integers
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

} // namespace

bool Value::truthy() const {
    switch (kind()) {
        case Kind::none: return false;
        case Kind::boolean: return as_bool();
        case Kind::integer: return as_int() != 0;
        case Kind::real: return as_real() != 0.0;
        case Kind::string: return !as_string().empty();
        case Kind::list:
        case Kind::tuple: return !sequence_items().empty();
        case Kind::image: return true;
    }
    return false;
}

bool Value::equals(const Value& other) const {
    auto numeric = [](const Value& v) {
        return v.is_number() || v.kind() == Kind::boolean;
    };
    auto as_num = [](const Value& v) {
        return v.kind() == Kind::boolean ? (v.as_bool() ? 1.0 : 0.0) : v.as_number();
    };
    if (numeric(*this) && numeric(other)) return as_num(*this) == as_num(other);
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case Kind::none: return true;
        case Kind::string: return as_string() == other.as_string();
        case Kind::list:
        case Kind::tuple: {
            const List& a = sequence_items();
            const List& b = other.sequence_items();
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (!a[i].equals(b[i])) return false;
            return true;
        }
        case Kind::image: return as_image().suite == other.as_image().suite;
        default: return false;
    }
}

std::string Value::repr() const {
    switch (kind()) {
        case Kind::none: return "None";
        case Kind::boolean: return as_bool() ? "True" : "False";
        case Kind::integer: return std::to_string(as_int());
        case Kind::real: return real_repr(as_real());
        case Kind::string: return "'" + as_string() + "'";
        case Kind::list:
        case Kind::tuple: {
            std::string out(kind() == Kind::list ? "[" : "(");
            const List& items = sequence_items();
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += items[i].repr();
            }
            if (kind() == Kind::tuple && items.size() == 1) out += ",";
            out += kind() == Kind::list ? "]" : ")";
            return out;
        }
        case Kind::image: return "<image>";
    }
    return "?";
}

std::string_view Value::kind_name(Kind k) {
    switch (k) {
        case Kind::none: return "none";
        case Kind::boolean: return "bool";
        case Kind::integer: return "int";
        case Kind::real: return "float";
        case Kind::string: return "string";
        case Kind::list: return "list";
        case Kind::tuple: return "tuple";
        case Kind::image: return "image";
    }
    return "?";
}

} // namespace progsyn
