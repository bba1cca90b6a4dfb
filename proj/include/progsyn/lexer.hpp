#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace progsyn {

enum class Tok {
    name,
    int_lit,
    float_lit,
    string_lit,
    // operators and punctuation
    plus, minus, star, slash,
    lt, gt, le, ge, eq, ne,
    assign,
    lparen, rparen, lbracket, rbracket,
    comma, colon, dot,
    // layout
    newline, indent, dedent,
    end,
};

struct Token {
    Tok type;
    std::string text;
    int line;
    int col;
};

// Tokenizes an indentation-delimited source block. Emits newline after each
// logical line and indent/dedent pairs from the indentation stack; newlines
// inside parentheses or brackets are joined. '#' starts a comment. Throws
// RuntimeError(SyntaxError) on unknown characters or inconsistent dedents.
std::vector<Token> lex(std::string_view source);

} // namespace progsyn
