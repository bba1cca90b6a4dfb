#include "progsyn/ast.hpp"

#include <cctype>

#include "progsyn/errors.hpp"
#include "progsyn/lexer.hpp"

namespace progsyn {

namespace {

const char* kKeywords[] = {"if",    "elif",     "else", "for",  "while", "in",   "return",
                           "break", "continue", "and",  "or",   "not",   "True", "False",
                           "None",  "def"};

bool is_keyword(const std::string& s) {
    for (const char* k : kKeywords)
        if (s == k) return true;
    return false;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, bool allow_return)
        : toks_(std::move(tokens)), allow_return_(allow_return) {}

    Block parse_block_toplevel() {
        Block block;
        while (!at(Tok::end)) block.push_back(statement());
        return block;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    bool allow_return_;

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t n = 1) const {
        return toks_[std::min(pos_ + n, toks_.size() - 1)];
    }
    bool at(Tok t) const { return cur().type == t; }
    bool at_name(const char* word) const { return at(Tok::name) && cur().text == word; }

    Token advance() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw RuntimeError(ErrorKind::SyntaxError, cur().line, msg);
    }

    Token expect(Tok t, const char* what) {
        if (!at(t)) fail(std::string("expected ") + what);
        return advance();
    }

    void expect_newline() {
        if (at(Tok::newline)) { advance(); return; }
        if (at(Tok::end)) return;
        fail("expected end of line");
    }

    std::string expect_identifier() {
        if (!at(Tok::name) || is_keyword(cur().text)) fail("expected identifier");
        return advance().text;
    }

    Block suite() {
        expect(Tok::colon, "':'");
        expect_newline();
        if (!at(Tok::indent)) fail("expected an indented block");
        advance();
        Block block;
        while (!at(Tok::dedent) && !at(Tok::end)) block.push_back(statement());
        if (at(Tok::dedent)) advance();
        return block;
    }

    StmtPtr statement() {
        int line = cur().line;
        if (at_name("if")) return if_statement();
        if (at_name("for")) return for_statement();
        if (at_name("while")) return while_statement();
        if (at_name("return")) return return_statement();
        if (at_name("def")) fail("nested definitions are not supported");
        if (at_name("break") || at_name("continue")) {
            bool is_break = cur().text == "break";
            advance();
            expect_newline();
            auto s = std::make_unique<Stmt>();
            s->kind = is_break ? Stmt::Kind::brk : Stmt::Kind::cont;
            s->line = line;
            return s;
        }
        return simple_statement();
    }

    StmtPtr if_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::if_chain;
        s->line = cur().line;
        advance();  // if
        ExprPtr cond = expression();
        s->arms.emplace_back(std::move(cond), suite());
        while (at_name("elif")) {
            advance();
            ExprPtr c = expression();
            s->arms.emplace_back(std::move(c), suite());
        }
        if (at_name("else")) {
            advance();
            s->else_body = suite();
        }
        return s;
    }

    StmtPtr for_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::for_loop;
        s->line = cur().line;
        advance();  // for
        s->targets.push_back(expect_identifier());
        while (at(Tok::comma)) {
            advance();
            s->targets.push_back(expect_identifier());
        }
        if (!at_name("in")) fail("expected 'in'");
        advance();
        s->expr = expression();
        s->body = suite();
        return s;
    }

    StmtPtr while_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::while_loop;
        s->line = cur().line;
        advance();  // while
        s->expr = expression();
        s->body = suite();
        return s;
    }

    StmtPtr return_statement() {
        if (!allow_return_) fail("'return' is only allowed inside method bodies");
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::ret;
        s->line = cur().line;
        advance();  // return
        if (!at(Tok::newline) && !at(Tok::end)) s->expr = expression_list();
        expect_newline();
        return s;
    }

    // assignment, tuple assignment, or a bare expression
    StmtPtr simple_statement() {
        int line = cur().line;

        // lookahead for "name[, name...] =" assignment forms
        if (at(Tok::name) && !is_keyword(cur().text)) {
            std::size_t save = pos_;
            std::vector<std::string> targets;
            targets.push_back(advance().text);
            while (at(Tok::comma) && peek().type == Tok::name && !is_keyword(peek().text)) {
                advance();
                targets.push_back(advance().text);
            }
            if (at(Tok::assign)) {
                advance();
                auto s = std::make_unique<Stmt>();
                s->kind = targets.size() == 1 ? Stmt::Kind::assign : Stmt::Kind::tuple_assign;
                s->line = line;
                s->targets = std::move(targets);
                s->expr = expression_list();
                expect_newline();
                return s;
            }
            pos_ = save;  // not an assignment; reparse as expression
        }

        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::expr;
        s->line = line;
        s->expr = expression_list();
        if (at(Tok::assign)) fail("cannot assign to this target");
        expect_newline();
        return s;
    }

    // expression, or a bare tuple "a, b"
    ExprPtr expression_list() {
        ExprPtr first = expression();
        if (!at(Tok::comma)) return first;
        auto tup = std::make_unique<Expr>();
        tup->kind = Expr::Kind::tuple_lit;
        tup->line = first->line;
        tup->items.push_back(std::move(first));
        while (at(Tok::comma)) {
            advance();
            if (at(Tok::newline) || at(Tok::end)) break;  // trailing comma
            tup->items.push_back(expression());
        }
        return tup;
    }

    ExprPtr expression() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr left = and_expr();
        while (at_name("or")) {
            int line = cur().line;
            advance();
            left = make_binary(BinOp::logical_or, std::move(left), and_expr(), line);
        }
        return left;
    }

    ExprPtr and_expr() {
        ExprPtr left = not_expr();
        while (at_name("and")) {
            int line = cur().line;
            advance();
            left = make_binary(BinOp::logical_and, std::move(left), not_expr(), line);
        }
        return left;
    }

    ExprPtr not_expr() {
        if (at_name("not")) {
            int line = cur().line;
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::unary;
            e->un_op = UnOp::logical_not;
            e->line = line;
            e->lhs = not_expr();
            return e;
        }
        return comparison();
    }

    ExprPtr comparison() {
        ExprPtr left = additive();
        BinOp op;
        switch (cur().type) {
            case Tok::lt: op = BinOp::lt; break;
            case Tok::gt: op = BinOp::gt; break;
            case Tok::le: op = BinOp::le; break;
            case Tok::ge: op = BinOp::ge; break;
            case Tok::eq: op = BinOp::eq; break;
            case Tok::ne: op = BinOp::ne; break;
            default: return left;
        }
        int line = cur().line;
        advance();
        ExprPtr result = make_binary(op, std::move(left), additive(), line);
        switch (cur().type) {
            case Tok::lt: case Tok::gt: case Tok::le: case Tok::ge: case Tok::eq: case Tok::ne:
                fail("chained comparisons are not supported");
            default: return result;
        }
    }

    ExprPtr additive() {
        ExprPtr left = multiplicative();
        while (at(Tok::plus) || at(Tok::minus)) {
            BinOp op = at(Tok::plus) ? BinOp::add : BinOp::sub;
            int line = cur().line;
            advance();
            left = make_binary(op, std::move(left), multiplicative(), line);
        }
        return left;
    }

    ExprPtr multiplicative() {
        ExprPtr left = unary();
        while (at(Tok::star) || at(Tok::slash)) {
            BinOp op = at(Tok::star) ? BinOp::mul : BinOp::div;
            int line = cur().line;
            advance();
            left = make_binary(op, std::move(left), unary(), line);
        }
        return left;
    }

    ExprPtr unary() {
        if (at(Tok::minus)) {
            int line = cur().line;
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::unary;
            e->un_op = UnOp::neg;
            e->line = line;
            e->lhs = unary();
            return e;
        }
        if (at(Tok::plus)) { advance(); return unary(); }
        return postfix();
    }

    ExprPtr postfix() {
        ExprPtr base = atom();
        while (true) {
            if (at(Tok::lbracket)) {
                int line = cur().line;
                advance();
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::index;
                e->line = line;
                e->lhs = std::move(base);
                e->rhs = expression();
                expect(Tok::rbracket, "']'");
                base = std::move(e);
            } else if (at(Tok::dot)) {
                int line = cur().line;
                advance();
                std::string attr = expect_identifier();
                if (attr != "append")
                    throw RuntimeError(ErrorKind::SyntaxError, line,
                                       "attribute access is not supported (only .append)");
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::call;
                e->line = line;
                e->name = "append";
                e->receiver = std::move(base);
                expect(Tok::lparen, "'('");
                parse_call_args(*e);
                base = std::move(e);
            } else if (at(Tok::lparen) && base->kind == Expr::Kind::name) {
                int line = base->line;
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::call;
                e->line = line;
                e->name = base->name;
                advance();  // (
                parse_call_args(*e);
                base = std::move(e);
            } else {
                return base;
            }
        }
    }

    void parse_call_args(Expr& call) {
        if (at(Tok::rparen)) { advance(); return; }
        while (true) {
            if (at(Tok::name) && !is_keyword(cur().text) && peek().type == Tok::assign) {
                std::string key = advance().text;
                advance();  // =
                call.kwargs.emplace_back(std::move(key), expression());
            } else {
                if (!call.kwargs.empty())
                    fail("positional argument follows keyword argument");
                call.items.push_back(expression());
            }
            if (at(Tok::comma)) { advance(); continue; }
            expect(Tok::rparen, "')'");
            return;
        }
    }

    ExprPtr atom() {
        int line = cur().line;
        switch (cur().type) {
            case Tok::int_lit: {
                auto e = make_literal(Value::integer(std::stoll(advance().text)), line);
                return e;
            }
            case Tok::float_lit:
                return make_literal(Value::real(std::stod(advance().text)), line);
            case Tok::string_lit:
                return make_literal(Value::str(advance().text), line);
            case Tok::name: {
                const std::string& word = cur().text;
                if (word == "True") { advance(); return make_literal(Value::boolean(true), line); }
                if (word == "False") { advance(); return make_literal(Value::boolean(false), line); }
                if (word == "None") { advance(); return make_literal(Value::none(), line); }
                if (is_keyword(word)) fail("unexpected keyword '" + word + "'");
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::name;
                e->line = line;
                e->name = advance().text;
                return e;
            }
            case Tok::lparen: {
                advance();
                if (at(Tok::rparen)) fail("empty parentheses");
                ExprPtr first = expression();
                if (at(Tok::rparen)) { advance(); return first; }  // grouping
                auto tup = std::make_unique<Expr>();
                tup->kind = Expr::Kind::tuple_lit;
                tup->line = line;
                tup->items.push_back(std::move(first));
                while (at(Tok::comma)) {
                    advance();
                    if (at(Tok::rparen)) break;  // trailing comma
                    tup->items.push_back(expression());
                }
                expect(Tok::rparen, "')'");
                return tup;
            }
            case Tok::lbracket: {
                advance();
                auto lst = std::make_unique<Expr>();
                lst->kind = Expr::Kind::list_lit;
                lst->line = line;
                if (at(Tok::rbracket)) { advance(); return lst; }
                lst->items.push_back(expression());
                while (at(Tok::comma)) {
                    advance();
                    if (at(Tok::rbracket)) break;
                    lst->items.push_back(expression());
                }
                expect(Tok::rbracket, "']'");
                return lst;
            }
            default:
                fail("unexpected token");
        }
    }

    static ExprPtr make_literal(Value v, int line) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::literal;
        e->line = line;
        e->literal = std::move(v);
        return e;
    }

    static ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs, int line) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::binary;
        e->bin_op = op;
        e->line = line;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }
};

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

bool valid_identifier(const std::string& s) {
    if (s.empty() || is_keyword(s)) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

} // namespace

Program parse_program(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw RuntimeError(ErrorKind::SyntaxError, 1, "empty program");
    Parser parser(lex(text), /*allow_return=*/false);
    Program program;
    program.body = parser.parse_block_toplevel();
    program.source_lines = split_lines(text);
    return program;
}

MethodBody parse_method_body(std::string_view text, std::vector<std::string> params) {
    for (const std::string& p : params)
        if (!valid_identifier(p))
            throw RuntimeError(ErrorKind::SyntaxError, 1, "invalid parameter name '" + p + "'");
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw RuntimeError(ErrorKind::SyntaxError, 1, "empty method body");
    Parser parser(lex(text), /*allow_return=*/true);
    MethodBody method;
    method.body = parser.parse_block_toplevel();
    method.params = std::move(params);
    method.source_lines = split_lines(text);
    return method;
}

} // namespace progsyn
