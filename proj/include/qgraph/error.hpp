#pragma once

#include <stdexcept>
#include <string>

namespace qg {

enum class ErrorKind {
    // input
    Disconnected,
    NonPositiveLength,
    SingleLoopGraph,
    DegreeTwoVertex,
    InvalidFamilyParams,
    InvalidInput,
    WrongFamily,
    InsufficientSample,
    NotSimple,
    NonGenericInput,
    SmallK,
    NotNeumannStar,
    NotOnSigmaReg,
    NotGeneric,
    NotOnSecularSet,
    BadCoordinate,
    ZeroBoundaryValue,
    MismatchedK,
    // hard assertions
    IdentityViolation,
    HardBoundViolation,
    LowerBoundViolation,
    SignDegeneracy,
    DegenerateEdge,
    BorderlineGenericity,
    // solver
    PhaseTrackingAmbiguity,
    RealizationFailure,
    SolverFailure,
};

const char* to_string(ErrorKind kind);

// CLI exit code: 2 input, 3 hard assertion, 4 solver.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qg
