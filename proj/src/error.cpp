#include "qgraph/error.hpp"

namespace qg {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Disconnected: return "Disconnected";
        case ErrorKind::NonPositiveLength: return "NonPositiveLength";
        case ErrorKind::SingleLoopGraph: return "SingleLoopGraph";
        case ErrorKind::DegreeTwoVertex: return "DegreeTwoVertex";
        case ErrorKind::InvalidFamilyParams: return "InvalidFamilyParams";
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::WrongFamily: return "WrongFamily";
        case ErrorKind::InsufficientSample: return "InsufficientSample";
        case ErrorKind::NotSimple: return "NotSimple";
        case ErrorKind::NonGenericInput: return "NonGenericInput";
        case ErrorKind::SmallK: return "SmallK";
        case ErrorKind::NotNeumannStar: return "NotNeumannStar";
        case ErrorKind::NotOnSigmaReg: return "NotOnSigmaReg";
        case ErrorKind::NotGeneric: return "NotGeneric";
        case ErrorKind::NotOnSecularSet: return "NotOnSecularSet";
        case ErrorKind::BadCoordinate: return "BadCoordinate";
        case ErrorKind::ZeroBoundaryValue: return "ZeroBoundaryValue";
        case ErrorKind::MismatchedK: return "MismatchedK";
        case ErrorKind::IdentityViolation: return "IdentityViolation";
        case ErrorKind::HardBoundViolation: return "HardBoundViolation";
        case ErrorKind::LowerBoundViolation: return "LowerBoundViolation";
        case ErrorKind::SignDegeneracy: return "SignDegeneracy";
        case ErrorKind::DegenerateEdge: return "DegenerateEdge";
        case ErrorKind::BorderlineGenericity: return "BorderlineGenericity";
        case ErrorKind::PhaseTrackingAmbiguity: return "PhaseTrackingAmbiguity";
        case ErrorKind::RealizationFailure: return "RealizationFailure";
        case ErrorKind::SolverFailure: return "SolverFailure";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::IdentityViolation:
        case ErrorKind::HardBoundViolation:
        case ErrorKind::LowerBoundViolation:
        case ErrorKind::SignDegeneracy:
        case ErrorKind::DegenerateEdge:
        case ErrorKind::BorderlineGenericity:
            return 3;
        case ErrorKind::PhaseTrackingAmbiguity:
        case ErrorKind::RealizationFailure:
        case ErrorKind::SolverFailure:
            return 4;
        default:
            return 2;
    }
}

}  // namespace qg
