#include "progsyn/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace progsyn {

namespace {

struct BreakSignal {};
struct ContinueSignal {};
struct ReturnSignal {
    Value value;
};

class Evaluator {
public:
    Evaluator(const MethodResolver* registry, const SpecialistSuite& suite, const Limits& limits,
              ExecutionTrace& trace)
        : registry_(registry), suite_(suite), limits_(limits), trace_(trace) {}

    using Env = std::unordered_map<std::string, Value>;

    Value run_program(const Program& program) {
        Env globals;
        globals.emplace("image", Value::image({&suite_}));
        try {
            exec_block(program.body, globals, &program.source_lines, "");
        } catch (BreakSignal&) {
            throw RuntimeError(ErrorKind::SyntaxError, current_line_, "'break' outside a loop");
        } catch (ContinueSignal&) {
            throw RuntimeError(ErrorKind::SyntaxError, current_line_, "'continue' outside a loop");
        }
        auto it = globals.find("final_result");
        if (it == globals.end()) {
            int last = program.source_lines.empty()
                           ? 1
                           : static_cast<int>(program.source_lines.size());
            throw RuntimeError(ErrorKind::MissingFinalResult, last,
                               "program never assigned the variable 'final_result'");
        }
        return it->second;
    }

    Value run_method(const MethodBody& method, const std::vector<Value>& args,
                     const std::string& name) {
        if (args.size() != method.params.size())
            throw RuntimeError(ErrorKind::ArgumentCount, 1,
                               name + "() takes " + std::to_string(method.params.size()) +
                                   " arguments, got " + std::to_string(args.size()));
        Env env;
        for (std::size_t i = 0; i < args.size(); ++i) env.emplace(method.params[i], args[i]);
        try {
            exec_block(method.body, env, &method.source_lines, name);
        } catch (ReturnSignal& r) {
            return std::move(r.value);
        } catch (BreakSignal&) {
            throw RuntimeError(ErrorKind::SyntaxError, current_line_, "'break' outside a loop");
        } catch (ContinueSignal&) {
            throw RuntimeError(ErrorKind::SyntaxError, current_line_, "'continue' outside a loop");
        }
        return Value::none();
    }

private:
    const MethodResolver* registry_;
    const SpecialistSuite& suite_;
    const Limits& limits_;
    ExecutionTrace& trace_;
    int call_depth_ = 0;
    int current_line_ = 1;

    void count_step(int line) {
        current_line_ = line;
        if (++trace_.steps > limits_.max_steps)
            throw RuntimeError(ErrorKind::StepLimitExceeded, line,
                               "exceeded the step limit of " + std::to_string(limits_.max_steps));
    }

    void record(int line, const std::vector<std::string>* lines, const std::string& scope,
                std::string note) {
        if (trace_.entries.size() >= limits_.max_trace) {
            trace_.truncated = true;
            return;
        }
        TraceEntry entry;
        entry.line = line;
        if (lines && line >= 1 && line <= static_cast<int>(lines->size())) {
            entry.text = (*lines)[static_cast<std::size_t>(line - 1)];
            // strip indentation for readability
            auto pos = entry.text.find_first_not_of(" \t");
            if (pos != std::string::npos && pos > 0) entry.text.erase(0, pos);
        }
        if (!scope.empty()) entry.text = "[" + scope + "] " + entry.text;
        entry.note = std::move(note);
        trace_.entries.push_back(std::move(entry));
    }

    void exec_block(const Block& block, Env& env, const std::vector<std::string>* lines,
                    const std::string& scope) {
        for (const StmtPtr& stmt : block) exec_stmt(*stmt, env, lines, scope);
    }

    void exec_stmt(const Stmt& stmt, Env& env, const std::vector<std::string>* lines,
                   const std::string& scope) {
        count_step(stmt.line);
        switch (stmt.kind) {
            case Stmt::Kind::assign: {
                Value v = eval(*stmt.expr, env);
                record(stmt.line, lines, scope, stmt.targets[0] + " = " + summary(v));
                env[stmt.targets[0]] = std::move(v);
                return;
            }
            case Stmt::Kind::tuple_assign: {
                Value v = eval(*stmt.expr, env);
                if (!v.is_sequence())
                    throw RuntimeError(ErrorKind::TypeMismatch, stmt.line,
                                       "cannot unpack a " + std::string(Value::kind_name(v.kind())) +
                                           " value");
                const Value::List& items = v.sequence_items();
                if (items.size() != stmt.targets.size())
                    throw RuntimeError(ErrorKind::TypeMismatch, stmt.line,
                                       "cannot unpack " + std::to_string(items.size()) +
                                           " values into " + std::to_string(stmt.targets.size()) +
                                           " names");
                record(stmt.line, lines, scope, join_targets(stmt.targets) + " = " + summary(v));
                for (std::size_t i = 0; i < items.size(); ++i) env[stmt.targets[i]] = items[i];
                return;
            }
            case Stmt::Kind::expr:
                record(stmt.line, lines, scope, "");
                eval(*stmt.expr, env);
                return;
            case Stmt::Kind::if_chain: {
                record(stmt.line, lines, scope, "");
                for (const auto& [cond, body] : stmt.arms) {
                    count_step(cond->line);
                    if (eval(*cond, env).truthy()) {
                        exec_block(body, env, lines, scope);
                        return;
                    }
                }
                exec_block(stmt.else_body, env, lines, scope);
                return;
            }
            case Stmt::Kind::for_loop: {
                record(stmt.line, lines, scope, "");
                Value seq = eval(*stmt.expr, env);
                if (!seq.is_sequence())
                    throw RuntimeError(ErrorKind::TypeMismatch, stmt.line,
                                       "cannot iterate over a " +
                                           std::string(Value::kind_name(seq.kind())) + " value");
                // iterate over a snapshot so body mutations cannot skew the loop
                Value::List items = seq.sequence_items();
                for (const Value& item : items) {
                    count_step(stmt.line);
                    if (stmt.targets.size() == 1) {
                        env[stmt.targets[0]] = item;
                    } else {
                        if (!item.is_sequence() || item.sequence_items().size() != stmt.targets.size())
                            throw RuntimeError(ErrorKind::TypeMismatch, stmt.line,
                                               "cannot unpack loop item " + summary(item));
                        for (std::size_t i = 0; i < stmt.targets.size(); ++i)
                            env[stmt.targets[i]] = item.sequence_items()[i];
                    }
                    try {
                        exec_block(stmt.body, env, lines, scope);
                    } catch (BreakSignal&) {
                        return;
                    } catch (ContinueSignal&) {
                        continue;
                    }
                }
                return;
            }
            case Stmt::Kind::while_loop: {
                record(stmt.line, lines, scope, "");
                while (true) {
                    count_step(stmt.line);
                    if (!eval(*stmt.expr, env).truthy()) return;
                    try {
                        exec_block(stmt.body, env, lines, scope);
                    } catch (BreakSignal&) {
                        return;
                    } catch (ContinueSignal&) {
                        continue;
                    }
                }
            }
            case Stmt::Kind::ret: {
                Value v = stmt.expr ? eval(*stmt.expr, env) : Value::none();
                record(stmt.line, lines, scope, "return " + summary(v));
                throw ReturnSignal{std::move(v)};
            }
            case Stmt::Kind::brk:
                record(stmt.line, lines, scope, "");
                throw BreakSignal{};
            case Stmt::Kind::cont:
                record(stmt.line, lines, scope, "");
                throw ContinueSignal{};
        }
    }

    static std::string join_targets(const std::vector<std::string>& ts) {
        std::string out;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i) out += ", ";
            out += ts[i];
        }
        return out;
    }

    static std::string summary(const Value& v) {
        std::string r = v.repr();
        if (r.size() > 80) r = r.substr(0, 77) + "...";
        return r;
    }

    Value eval(const Expr& expr, Env& env) {
        count_step(expr.line);
        switch (expr.kind) {
            case Expr::Kind::literal:
                return expr.literal;
            case Expr::Kind::name: {
                auto it = env.find(expr.name);
                if (it == env.end())
                    throw RuntimeError(ErrorKind::UndefinedVariable, expr.line,
                                       "name '" + expr.name + "' is not defined", expr.name);
                return it->second;
            }
            case Expr::Kind::unary: {
                Value v = eval(*expr.lhs, env);
                if (expr.un_op == UnOp::logical_not) return Value::boolean(!v.truthy());
                if (v.kind() == Value::Kind::integer) return Value::integer(-v.as_int());
                if (v.kind() == Value::Kind::real) return Value::real(-v.as_real());
                throw RuntimeError(ErrorKind::TypeMismatch, expr.line,
                                   "cannot negate a " + std::string(Value::kind_name(v.kind())) +
                                       " value");
            }
            case Expr::Kind::binary:
                return eval_binary(expr, env);
            case Expr::Kind::list_lit: {
                Value::List items;
                items.reserve(expr.items.size());
                for (const ExprPtr& e : expr.items) items.push_back(eval(*e, env));
                return Value::list(std::move(items));
            }
            case Expr::Kind::tuple_lit: {
                Value::List items;
                items.reserve(expr.items.size());
                for (const ExprPtr& e : expr.items) items.push_back(eval(*e, env));
                return Value::tuple(std::move(items));
            }
            case Expr::Kind::index: {
                Value base = eval(*expr.lhs, env);
                Value idx = eval(*expr.rhs, env);
                if (!base.is_sequence())
                    throw RuntimeError(ErrorKind::TypeMismatch, expr.line,
                                       "cannot index a " +
                                           std::string(Value::kind_name(base.kind())) + " value");
                if (idx.kind() != Value::Kind::integer)
                    throw RuntimeError(ErrorKind::TypeMismatch, expr.line,
                                       "list index must be an integer");
                const Value::List& items = base.sequence_items();
                std::int64_t i = idx.as_int();
                if (i < 0) i += static_cast<std::int64_t>(items.size());
                if (i < 0 || i >= static_cast<std::int64_t>(items.size()))
                    throw RuntimeError(ErrorKind::IndexOutOfRange, expr.line,
                                       "index " + std::to_string(idx.as_int()) +
                                           " out of range for length " +
                                           std::to_string(items.size()));
                return items[static_cast<std::size_t>(i)];
            }
            case Expr::Kind::call:
                return eval_call(expr, env);
        }
        throw RuntimeError(ErrorKind::TypeMismatch, expr.line, "unreachable expression kind");
    }

    Value eval_binary(const Expr& expr, Env& env) {
        // short-circuit forms first
        if (expr.bin_op == BinOp::logical_and) {
            Value l = eval(*expr.lhs, env);
            if (!l.truthy()) return Value::boolean(false);
            return Value::boolean(eval(*expr.rhs, env).truthy());
        }
        if (expr.bin_op == BinOp::logical_or) {
            Value l = eval(*expr.lhs, env);
            if (l.truthy()) return Value::boolean(true);
            return Value::boolean(eval(*expr.rhs, env).truthy());
        }

        Value l = eval(*expr.lhs, env);
        Value r = eval(*expr.rhs, env);
        int line = expr.line;

        switch (expr.bin_op) {
            case BinOp::eq: return Value::boolean(l.equals(r));
            case BinOp::ne: return Value::boolean(!l.equals(r));
            case BinOp::lt: return Value::boolean(compare(l, r, line) < 0);
            case BinOp::gt: return Value::boolean(compare(l, r, line) > 0);
            case BinOp::le: return Value::boolean(compare(l, r, line) <= 0);
            case BinOp::ge: return Value::boolean(compare(l, r, line) >= 0);
            case BinOp::add:
                if (l.kind() == Value::Kind::string && r.kind() == Value::Kind::string)
                    return Value::str(l.as_string() + r.as_string());
                if (l.kind() == Value::Kind::list && r.kind() == Value::Kind::list) {
                    Value::List out = l.sequence_items();
                    const Value::List& extra = r.sequence_items();
                    out.insert(out.end(), extra.begin(), extra.end());
                    return Value::list(std::move(out));
                }
                return arithmetic(l, r, line, '+');
            case BinOp::sub: return arithmetic(l, r, line, '-');
            case BinOp::mul: return arithmetic(l, r, line, '*');
            case BinOp::div: {
                require_number(l, line);
                require_number(r, line);
                if (r.as_number() == 0.0)
                    throw RuntimeError(ErrorKind::DivisionByZero, line, "division by zero");
                return Value::real(l.as_number() / r.as_number());
            }
            default:
                throw RuntimeError(ErrorKind::TypeMismatch, line, "unreachable operator");
        }
    }

    static void require_number(const Value& v, int line) {
        if (!v.is_number())
            throw RuntimeError(ErrorKind::TypeMismatch, line,
                               "expected a number, got " + std::string(Value::kind_name(v.kind())));
    }

    static Value arithmetic(const Value& l, const Value& r, int line, char op) {
        if (!l.is_number() || !r.is_number())
            throw RuntimeError(ErrorKind::TypeMismatch, line,
                               std::string("unsupported operand types for ") + op + ": " +
                                   std::string(Value::kind_name(l.kind())) + " and " +
                                   std::string(Value::kind_name(r.kind())));
        if (l.kind() == Value::Kind::integer && r.kind() == Value::Kind::integer) {
            std::int64_t a = l.as_int(), b = r.as_int();
            switch (op) {
                case '+': return Value::integer(a + b);
                case '-': return Value::integer(a - b);
                default: return Value::integer(a * b);
            }
        }
        double a = l.as_number(), b = r.as_number();
        switch (op) {
            case '+': return Value::real(a + b);
            case '-': return Value::real(a - b);
            default: return Value::real(a * b);
        }
    }

    // three-way ordering for < > <= >=
    static int compare(const Value& l, const Value& r, int line) {
        if (l.is_number() && r.is_number()) {
            double a = l.as_number(), b = r.as_number();
            return a < b ? -1 : a > b ? 1 : 0;
        }
        if (l.kind() == Value::Kind::string && r.kind() == Value::Kind::string) {
            int c = l.as_string().compare(r.as_string());
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
        throw RuntimeError(ErrorKind::TypeMismatch, line,
                           "cannot order " + std::string(Value::kind_name(l.kind())) + " and " +
                               std::string(Value::kind_name(r.kind())));
    }

    struct CallArgs {
        std::vector<Value> positional;
        std::vector<std::pair<std::string, Value>> keyword;
    };

    CallArgs eval_args(const Expr& call, Env& env) {
        CallArgs out;
        for (const ExprPtr& e : call.items) out.positional.push_back(eval(*e, env));
        for (const auto& [key, e] : call.kwargs) out.keyword.emplace_back(key, eval(*e, env));
        return out;
    }

    // binds positional + keyword arguments against a parameter name list
    std::vector<Value> bind_args(const std::string& fn, const std::vector<std::string>& params,
                                 CallArgs&& args, int line) {
        if (args.positional.size() > params.size())
            throw RuntimeError(ErrorKind::ArgumentCount, line,
                               fn + "() takes " + std::to_string(params.size()) +
                                   " arguments, got " + std::to_string(args.positional.size()));
        std::vector<std::optional<Value>> slots(params.size());
        for (std::size_t i = 0; i < args.positional.size(); ++i)
            slots[i] = std::move(args.positional[i]);
        for (auto& [key, value] : args.keyword) {
            auto it = std::find(params.begin(), params.end(), key);
            if (it == params.end())
                throw RuntimeError(ErrorKind::ArgumentCount, line,
                                   fn + "() got an unexpected keyword argument '" + key + "'");
            std::size_t idx = static_cast<std::size_t>(it - params.begin());
            if (slots[idx])
                throw RuntimeError(ErrorKind::ArgumentCount, line,
                                   fn + "() got multiple values for argument '" + key + "'");
            slots[idx] = std::move(value);
        }
        std::vector<Value> bound;
        bound.reserve(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!slots[i])
                throw RuntimeError(ErrorKind::ArgumentCount, line,
                                   fn + "() missing argument '" + params[i] + "'");
            bound.push_back(std::move(*slots[i]));
        }
        return bound;
    }

    Value eval_call(const Expr& call, Env& env) {
        const std::string& fn = call.name;
        int line = call.line;

        // receiver form: list.append(x)
        if (call.receiver) {
            Value recv = eval(*call.receiver, env);
            CallArgs args = eval_args(call, env);
            if (!args.keyword.empty() || args.positional.size() != 1)
                throw RuntimeError(ErrorKind::ArgumentCount, line,
                                   "append() takes exactly one argument");
            if (recv.kind() != Value::Kind::list)
                throw RuntimeError(ErrorKind::TypeMismatch, line,
                                   "append() requires a list receiver");
            recv.list_items().push_back(std::move(args.positional[0]));
            return Value::none();
        }

        if (is_specialist(fn)) return call_specialist(fn, eval_args(call, env), line);

        if (registry_) {
            if (auto method = registry_->resolve_method(fn)) {
                std::vector<Value> bound =
                    bind_args(fn, *method->params, eval_args(call, env), line);
                if (++call_depth_ > limits_.max_depth) {
                    --call_depth_;
                    throw RuntimeError(ErrorKind::StepLimitExceeded, line,
                                       "exceeded the call depth limit of " +
                                           std::to_string(limits_.max_depth));
                }
                Value result;
                try {
                    result = run_method(*method->body, bound, fn);
                } catch (...) {
                    --call_depth_;
                    throw;
                }
                --call_depth_;
                return result;
            }
        }

        if (fn == "len" || fn == "abs" || fn == "min" || fn == "max" || fn == "append")
            return call_builtin(fn, eval_args(call, env), line);

        throw RuntimeError(ErrorKind::UndefinedMethod, line,
                           "call to undefined method '" + fn + "'", fn);
    }

    static bool is_specialist(const std::string& fn) {
        return fn == "loc" || fn == "vqa" || fn == "depth" || fn == "same_object" ||
               fn == "get_2D_object_size";
    }

    const SpecialistSuite& suite_for(const Value& v, const std::string& fn, int line) {
        if (v.kind() != Value::Kind::image || v.as_image().suite == nullptr)
            throw RuntimeError(ErrorKind::TypeMismatch, line,
                               fn + "() expects the image as its first argument");
        return *v.as_image().suite;
    }

    double number_arg(const Value& v, const std::string& fn, int line) {
        if (!v.is_number())
            throw RuntimeError(ErrorKind::TypeMismatch, line,
                               fn + "() expects numeric pixel coordinates");
        return v.as_number();
    }

    Value call_specialist(const std::string& fn, CallArgs&& raw, int line) {
        static const std::unordered_map<std::string, std::vector<std::string>> kParams = {
            {"loc", {"image", "object_prompt"}},
            {"vqa", {"image", "question", "x", "y"}},
            {"depth", {"image", "x", "y"}},
            {"same_object", {"image", "x_1", "y_1", "x_2", "y_2"}},
            {"get_2D_object_size", {"image", "x", "y"}},
        };
        std::vector<Value> a = bind_args(fn, kParams.at(fn), std::move(raw), line);
        try {
            const SpecialistSuite& suite = suite_for(a[0], fn, line);
            if (fn == "loc") {
                if (a[1].kind() != Value::Kind::string)
                    throw RuntimeError(ErrorKind::TypeMismatch, line,
                                       "loc() expects a string object prompt");
                Value::List points;
                for (const PixelPoint& p : suite.loc(a[1].as_string()))
                    points.push_back(Value::tuple({Value::real(p.u), Value::real(p.v)}));
                return Value::list(std::move(points));
            }
            if (fn == "vqa") {
                if (a[1].kind() != Value::Kind::string)
                    throw RuntimeError(ErrorKind::TypeMismatch, line,
                                       "vqa() expects a string question");
                return Value::str(suite.vqa(a[1].as_string(), number_arg(a[2], fn, line),
                                            number_arg(a[3], fn, line)));
            }
            if (fn == "depth")
                return Value::real(
                    suite.depth(number_arg(a[1], fn, line), number_arg(a[2], fn, line)));
            if (fn == "same_object")
                return Value::boolean(suite.same_object(
                    number_arg(a[1], fn, line), number_arg(a[2], fn, line),
                    number_arg(a[3], fn, line), number_arg(a[4], fn, line)));
            // get_2D_object_size
            auto [w, h] =
                suite.object_size_2d(number_arg(a[1], fn, line), number_arg(a[2], fn, line));
            return Value::tuple({Value::real(w), Value::real(h)});
        } catch (const NoObjectAtPointError& e) {
            throw RuntimeError(ErrorKind::NoObjectAtPoint, line, e.what());
        } catch (const UnsupportedQuestionError& e) {
            throw RuntimeError(ErrorKind::UnsupportedQuestion, line, e.what());
        } catch (const RuntimeError&) {
            throw;
        } catch (const std::exception& e) {
            throw RuntimeError(ErrorKind::SpecialistError, line,
                               fn + "() failed: " + std::string(e.what()));
        }
    }

    Value call_builtin(const std::string& fn, CallArgs&& args, int line) {
        if (!args.keyword.empty())
            throw RuntimeError(ErrorKind::ArgumentCount, line,
                               fn + "() takes no keyword arguments");
        std::vector<Value>& a = args.positional;
        if (fn == "len") {
            if (a.size() != 1)
                throw RuntimeError(ErrorKind::ArgumentCount, line, "len() takes one argument");
            if (a[0].kind() == Value::Kind::string)
                return Value::integer(static_cast<std::int64_t>(a[0].as_string().size()));
            if (a[0].is_sequence())
                return Value::integer(static_cast<std::int64_t>(a[0].sequence_items().size()));
            throw RuntimeError(ErrorKind::TypeMismatch, line,
                               "len() requires a string, list, or tuple");
        }
        if (fn == "abs") {
            if (a.size() != 1)
                throw RuntimeError(ErrorKind::ArgumentCount, line, "abs() takes one argument");
            if (a[0].kind() == Value::Kind::integer)
                return Value::integer(std::abs(a[0].as_int()));
            if (a[0].kind() == Value::Kind::real) return Value::real(std::fabs(a[0].as_real()));
            throw RuntimeError(ErrorKind::TypeMismatch, line, "abs() requires a number");
        }
        if (fn == "min" || fn == "max") {
            std::vector<Value> pool;
            if (a.size() == 1 && a[0].is_sequence())
                pool = a[0].sequence_items();
            else
                pool = std::move(a);
            if (pool.empty())
                throw RuntimeError(ErrorKind::TypeMismatch, line, fn + "() of an empty sequence");
            for (const Value& v : pool)
                if (!v.is_number())
                    throw RuntimeError(ErrorKind::TypeMismatch, line,
                                       fn + "() requires numeric values");
            const Value* best = &pool[0];
            for (const Value& v : pool) {
                bool better = fn == "min" ? v.as_number() < best->as_number()
                                          : v.as_number() > best->as_number();
                if (better) best = &v;
            }
            return *best;
        }
        // append(list, value) free-function form
        if (a.size() != 2)
            throw RuntimeError(ErrorKind::ArgumentCount, line,
                               "append() takes a list and a value");
        if (a[0].kind() != Value::Kind::list)
            throw RuntimeError(ErrorKind::TypeMismatch, line, "append() requires a list");
        a[0].list_items().push_back(std::move(a[1]));
        return Value::none();
    }
};

} // namespace

ExecutionResult execute_program(const Program& program, const MethodResolver* registry,
                                const SpecialistSuite& suite, const Limits& limits) {
    ExecutionResult result;
    Evaluator evaluator(registry, suite, limits, result.trace);
    try {
        result.final_result = evaluator.run_program(program);
    } catch (const RuntimeError& e) {
        // the trace ends at the offending line
        if (result.trace.entries.empty() || result.trace.entries.back().line != e.line ||
            result.trace.truncated)
            result.trace.entries.push_back({e.line, program.line_text(e.line), e.render()});
        throw;
    }
    return result;
}

Value call_method_with_values(const MethodBody& method, const std::vector<Value>& args,
                              const MethodResolver* registry, const SpecialistSuite& suite,
                              const Limits& limits, ExecutionTrace* trace_out) {
    ExecutionTrace local;
    ExecutionTrace& trace = trace_out ? *trace_out : local;
    Evaluator evaluator(registry, suite, limits, trace);
    return evaluator.run_method(method, args, "method");
}

} // namespace progsyn
