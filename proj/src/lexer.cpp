#include "progsyn/lexer.hpp"

#include <cctype>

#include "progsyn/errors.hpp"

namespace progsyn {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw RuntimeError(ErrorKind::SyntaxError, line, msg);
}

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::vector<int> indents{0};
    int line = 1;
    std::size_t i = 0;
    int paren_depth = 0;
    bool at_line_start = true;

    auto push = [&](Tok t, std::string text, int col) {
        out.push_back({t, std::move(text), line, col});
    };

    while (i < src.size()) {
        if (at_line_start && paren_depth == 0) {
            // measure indentation; tabs advance to the next multiple of 4
            int width = 0;
            std::size_t j = i;
            while (j < src.size() && (src[j] == ' ' || src[j] == '\t')) {
                width = src[j] == '\t' ? (width / 4 + 1) * 4 : width + 1;
                ++j;
            }
            if (j >= src.size() || src[j] == '\n' || src[j] == '\r' || src[j] == '#') {
                // blank or comment-only line
                while (j < src.size() && src[j] != '\n') ++j;
                if (j < src.size()) ++j;
                ++line;
                i = j;
                continue;
            }
            if (width > indents.back()) {
                indents.push_back(width);
                push(Tok::indent, "", 1);
            } else {
                while (width < indents.back()) {
                    indents.pop_back();
                    push(Tok::dedent, "", 1);
                }
                if (width != indents.back())
                    fail(line, "inconsistent indentation");
            }
            i = j;
            at_line_start = false;
            continue;
        }

        char c = src[i];
        int col = static_cast<int>(i) + 1;

        if (c == '\r') { ++i; continue; }
        if (c == '\n') {
            ++i;
            if (paren_depth > 0) {  // implicit line joining
                ++line;
                continue;
            }
            if (!out.empty() && out.back().type != Tok::newline && out.back().type != Tok::indent &&
                out.back().type != Tok::dedent)
                push(Tok::newline, "", col);  // carries the line it terminates
            ++line;
            at_line_start = true;
            continue;
        }
        if (c == ' ' || c == '\t') { ++i; continue; }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }

        if (is_name_start(c)) {
            std::size_t j = i;
            while (j < src.size() && is_name_char(src[j])) ++j;
            push(Tok::name, std::string(src.substr(i, j - i)), col);
            i = j;
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            bool is_float = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                is_float = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    is_float = true;
                    ++k;
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            push(is_float ? Tok::float_lit : Tok::int_lit, std::string(src.substr(i, j - i)), col);
            i = j;
            continue;
        }

        if (c == '\'' || c == '"') {
            char quote = c;
            std::size_t j = i + 1;
            std::string text;
            while (j < src.size() && src[j] != quote && src[j] != '\n') {
                if (src[j] == '\\' && j + 1 < src.size()) {
                    char esc = src[j + 1];
                    switch (esc) {
                        case 'n': text += '\n'; break;
                        case 't': text += '\t'; break;
                        case '\\': text += '\\'; break;
                        case '\'': text += '\''; break;
                        case '"': text += '"'; break;
                        default: text += esc; break;
                    }
                    j += 2;
                } else {
                    text += src[j++];
                }
            }
            if (j >= src.size() || src[j] != quote) fail(line, "unterminated string literal");
            push(Tok::string_lit, std::move(text), col);
            i = j + 1;
            continue;
        }

        auto two = [&](char second) { return i + 1 < src.size() && src[i + 1] == second; };
        switch (c) {
            case '+': push(Tok::plus, "+", col); ++i; continue;
            case '-': push(Tok::minus, "-", col); ++i; continue;
            case '*': push(Tok::star, "*", col); ++i; continue;
            case '/': push(Tok::slash, "/", col); ++i; continue;
            case '(': ++paren_depth; push(Tok::lparen, "(", col); ++i; continue;
            case ')': --paren_depth; push(Tok::rparen, ")", col); ++i; continue;
            case '[': ++paren_depth; push(Tok::lbracket, "[", col); ++i; continue;
            case ']': --paren_depth; push(Tok::rbracket, "]", col); ++i; continue;
            case ',': push(Tok::comma, ",", col); ++i; continue;
            case ':': push(Tok::colon, ":", col); ++i; continue;
            case '.': push(Tok::dot, ".", col); ++i; continue;
            case '<':
                if (two('=')) { push(Tok::le, "<=", col); i += 2; }
                else { push(Tok::lt, "<", col); ++i; }
                continue;
            case '>':
                if (two('=')) { push(Tok::ge, ">=", col); i += 2; }
                else { push(Tok::gt, ">", col); ++i; }
                continue;
            case '=':
                if (two('=')) { push(Tok::eq, "==", col); i += 2; }
                else { push(Tok::assign, "=", col); ++i; }
                continue;
            case '!':
                if (two('=')) { push(Tok::ne, "!=", col); i += 2; continue; }
                fail(line, "unexpected character '!'");
            default:
                fail(line, std::string("unsupported character '") + c + "'");
        }
    }

    if (paren_depth > 0) fail(line, "unbalanced parentheses at end of input");
    if (!out.empty() && out.back().type != Tok::newline && out.back().type != Tok::indent &&
        out.back().type != Tok::dedent)
        out.push_back({Tok::newline, "", line, 1});
    while (indents.size() > 1) {
        indents.pop_back();
        out.push_back({Tok::dedent, "", line, 1});
    }
    out.push_back({Tok::end, "", line, 1});
    return out;
}

} // namespace progsyn
