#pragma once

#include <stdexcept>
#include <string>

namespace foldcert {

/// Error taxonomy for the toolkit. Kind decides the CLI exit code:
/// usage/config problems map to 1, "the math declined to certify"
/// outcomes map to 2.
enum class ErrorKind {
    Evaluation,        // non-finite output, callback failure
    Domain,            // point outside the problem domain
    DimensionMismatch,
    NotFound,          // unknown catalog name
    SvdFailure,
    NotOnZeroSet,      // certification refused: residual too large
    NotOnZeroSetOfG,
    HessianAsymmetry,
    BadExpression,
    BadLoadExpression,
    SchemaViolation,
    InsufficientData,
    NonTransversalFold,
    NoAttractorFound,
    NoConvergence,
    ZeroInput,
    DegeneratePairing,
    StartNotOnCurve,
    RankDeficientStart,
    Usage,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    /// Exit code convention: 1 = usage/config, 2 = numerical decline.
    int exit_code() const {
        switch (kind_) {
            case ErrorKind::NotFound:
            case ErrorKind::BadExpression:
            case ErrorKind::BadLoadExpression:
            case ErrorKind::SchemaViolation:
            case ErrorKind::DimensionMismatch:
            case ErrorKind::Usage:
                return 1;
            default:
                return 2;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

const char* to_string(ErrorKind kind);

}  // namespace foldcert
