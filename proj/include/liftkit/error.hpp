#pragma once

#include <stdexcept>
#include <string>

namespace liftkit {

// Mathematical precondition failures carry a code so callers (and the CLI
// exit-code policy) can tell them apart from I/O or schema problems.
enum class ErrorCode {
    InvalidInput,       // non-finite entries, malformed values
    InvalidParameter,   // out-of-range parameter (e.g. p < 1)
    ShapeMismatch,      // dimension / arity disagreement
    SymmetryError,      // input not Hermitian within tolerance
    DomainError,        // eigenvalue outside a scalar function's domain
    SpectralGap,        // spectrum meets a forbidden gap interval
    RankMismatch,       // source/range ranks disagree
    RankDeficient,      // singular input where invertibility is required
    DeltaTooLarge,      // construction succeeded but postcondition failed
    GapError,           // clustering / invertibility gap failure
    CommutationError,   // inputs fail an exact-commutation precondition
    ProjectionError,    // input fails an exact-projection precondition
    NonCauchy,          // representative array violates the telescoping bound
    BratteliError,      // inclusion multiplicity arithmetic inconsistent
    ResolutionError,    // trace atom unrepresentable at this dimension
    DegenerateCompression, // compression lost rank below the prescribed value
    CalibrationError,   // ensemble could not hit its defect target
    ConvergenceError,   // iterative routine exceeded its sweep budget
    LapackError,        // backend eigensolver/SVD failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidParameter: return "invalid-parameter";
        case ErrorCode::ShapeMismatch: return "shape-mismatch";
        case ErrorCode::SymmetryError: return "symmetry-error";
        case ErrorCode::DomainError: return "domain-error";
        case ErrorCode::SpectralGap: return "spectral-gap";
        case ErrorCode::RankMismatch: return "rank-mismatch";
        case ErrorCode::RankDeficient: return "rank-deficient";
        case ErrorCode::DeltaTooLarge: return "delta-too-large";
        case ErrorCode::GapError: return "gap-error";
        case ErrorCode::CommutationError: return "commutation-error";
        case ErrorCode::ProjectionError: return "projection-error";
        case ErrorCode::NonCauchy: return "non-cauchy";
        case ErrorCode::BratteliError: return "bratteli-error";
        case ErrorCode::ResolutionError: return "resolution-error";
        case ErrorCode::DegenerateCompression: return "degenerate-compression";
        case ErrorCode::CalibrationError: return "calibration-error";
        case ErrorCode::ConvergenceError: return "convergence-error";
        case ErrorCode::LapackError: return "lapack-error";
    }
    return "unknown";
}

} // namespace liftkit
