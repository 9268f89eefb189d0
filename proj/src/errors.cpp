#include "foldcert/errors.hpp"

namespace foldcert {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Evaluation: return "EvaluationError";
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::SvdFailure: return "SvdFailure";
        case ErrorKind::NotOnZeroSet: return "NotOnZeroSet";
        case ErrorKind::NotOnZeroSetOfG: return "NotOnZeroSetOfG";
        case ErrorKind::HessianAsymmetry: return "HessianAsymmetry";
        case ErrorKind::BadExpression: return "BadExpression";
        case ErrorKind::BadLoadExpression: return "BadLoadExpression";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::NonTransversalFold: return "NonTransversalFoldEncountered";
        case ErrorKind::NoAttractorFound: return "NoAttractorFound";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::ZeroInput: return "ZeroInput";
        case ErrorKind::DegeneratePairing: return "DegeneratePairing";
        case ErrorKind::StartNotOnCurve: return "StartNotOnCurve";
        case ErrorKind::RankDeficientStart: return "RankDeficientStart";
        case ErrorKind::Usage: return "Usage";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace foldcert
