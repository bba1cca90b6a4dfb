#pragma once

#include <exception>
#include <string>
#include <string_view>

namespace progsyn {

enum class ErrorKind {
    SyntaxError,
    UndefinedMethod,
    UndefinedVariable,
    TypeMismatch,
    ArgumentCount,
    IndexOutOfRange,
    DivisionByZero,
    StepLimitExceeded,
    MissingFinalResult,
    SpecialistError,
    UnsupportedQuestion,
    NoObjectAtPoint,
};

std::string_view error_kind_name(ErrorKind kind);

// The single error currency of program execution. render() is the stable
// one-line form that is fed back into agent prompts, so its wording must
// not depend on anything run-specific.
class RuntimeError : public std::exception {
public:
    RuntimeError(ErrorKind kind, int line, std::string message, std::string detail = "")
        : kind(kind), line(line), message(std::move(message)), detail(std::move(detail)) {
        rendered_ = std::string(error_kind_name(this->kind)) + " at line " +
                    std::to_string(this->line) + ": " + this->message;
    }

    ErrorKind kind;
    int line;
    std::string message;  // single line
    std::string detail;   // e.g. the undefined name, for programmatic branching

    // "<Kind> at line <n>: <message>"
    const std::string& render() const { return rendered_; }
    const char* what() const noexcept override { return rendered_.c_str(); }

private:
    std::string rendered_;
};

} // namespace progsyn
