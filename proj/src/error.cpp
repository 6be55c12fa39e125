#include "relaycancel/error.hpp"

namespace relaycancel {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ImproperTransferFunction: return "ImproperTransferFunction";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::DomainMismatch: return "DomainMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::AlgebraicLoop: return "AlgebraicLoop";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::SingularResolvent: return "SingularResolvent";
        case ErrorCode::Unstable: return "Unstable";
        case ErrorCode::NonRepresentableDelay: return "NonRepresentableDelay";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidProblem: return "InvalidProblem";
        case ErrorCode::NoStabilizingSolution: return "NoStabilizingSolution";
        case ErrorCode::IterationDivergence: return "IterationDivergence";
        case ErrorCode::PoleAtMinusOne: return "PoleAtMinusOne";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::RegularityViolation: return "RegularityViolation";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::PeriodMismatch: return "PeriodMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace relaycancel
