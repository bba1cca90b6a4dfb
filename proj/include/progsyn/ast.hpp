#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "progsyn/value.hpp"

namespace progsyn {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class BinOp { add, sub, mul, div, lt, gt, le, ge, eq, ne, logical_and, logical_or };
enum class UnOp { neg, logical_not };

struct Expr {
    enum class Kind { literal, name, binary, unary, call, list_lit, tuple_lit, index };

    Kind kind;
    int line = 0;

    Value literal;                 // literal
    std::string name;              // name reference | call target
    BinOp bin_op{};
    UnOp un_op{};
    ExprPtr lhs, rhs;              // binary; unary(lhs); index(lhs=base, rhs=subscript)
    std::vector<ExprPtr> items;    // call positional args | list/tuple elements
    std::vector<std::pair<std::string, ExprPtr>> kwargs;  // call name=value args
    ExprPtr receiver;              // method-call receiver; only .append is accepted
};

struct Stmt {
    enum class Kind { assign, tuple_assign, expr, if_chain, for_loop, while_loop, ret, brk, cont };

    Kind kind;
    int line = 0;

    std::vector<std::string> targets;  // assign (1), tuple_assign / for targets (1+)
    ExprPtr expr;                      // assign rhs | expr stmt | return value | loop condition/iterable
    std::vector<std::pair<ExprPtr, Block>> arms;  // if/elif arms
    Block body;                        // loop body
    Block else_body;                   // if else
};

struct Program {
    Block body;
    std::vector<std::string> source_lines;  // 1-indexed by (line - 1)

    std::string line_text(int line) const {
        if (line >= 1 && line <= static_cast<int>(source_lines.size()))
            return source_lines[static_cast<std::size_t>(line - 1)];
        return "";
    }
};

struct MethodBody {
    std::vector<std::string> params;
    Block body;
    std::vector<std::string> source_lines;
};

// Parses a top-level program: assignments, tuple unpacking, for-in, while,
// if/elif/else, break/continue, calls. Return statements are rejected here.
Program parse_program(std::string_view text);

// Parses a method body in a scope where params are pre-bound; return
// statements are allowed. Nested definitions are not supported.
MethodBody parse_method_body(std::string_view text, std::vector<std::string> params);

} // namespace progsyn
