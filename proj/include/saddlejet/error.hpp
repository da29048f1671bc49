#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace saddlejet {

enum class ErrorKind {
    Precondition,
    Evaluation,
    Integration,
    Strip,
    CharacteristicData,
    Classification,
    Ambiguity,
    Reconstruction,
    GridMismatch,
    Ingestion,
    Validation,
    Io,
};

inline std::string_view to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Evaluation: return "evaluation-domain";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::Strip: return "strip";
    case ErrorKind::CharacteristicData: return "characteristic-data";
    case ErrorKind::Classification: return "classification";
    case ErrorKind::Ambiguity: return "ambiguity";
    case ErrorKind::Reconstruction: return "reconstruction";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// All library failures derive from this; `kind()` lets the CLI map to exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond) {
        throw Error(kind, what);
    }
}

} // namespace saddlejet
