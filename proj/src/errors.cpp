#include "progsyn/errors.hpp"

namespace progsyn {

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::UndefinedMethod: return "UndefinedMethod";
        case ErrorKind::UndefinedVariable: return "UndefinedVariable";
        case ErrorKind::TypeMismatch: return "TypeMismatch";
        case ErrorKind::ArgumentCount: return "ArgumentCount";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::DivisionByZero: return "DivisionByZero";
        case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
        case ErrorKind::MissingFinalResult: return "MissingFinalResult";
        case ErrorKind::SpecialistError: return "SpecialistError";
        case ErrorKind::UnsupportedQuestion: return "UnsupportedQuestion";
        case ErrorKind::NoObjectAtPoint: return "NoObjectAtPoint";
    }
    return "UnknownError";
}

} // namespace progsyn
