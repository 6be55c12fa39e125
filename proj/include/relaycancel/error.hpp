#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relaycancel {

enum class ErrorCode {
    InvalidArgument,
    ImproperTransferFunction,
    ZeroDenominator,
    DomainMismatch,
    DimensionMismatch,
    AlgebraicLoop,
    NumericalFailure,
    SingularResolvent,
    Unstable,
    NonRepresentableDelay,
    IndexOutOfRange,
    InvalidProblem,
    NoStabilizingSolution,
    IterationDivergence,
    PoleAtMinusOne,
    Infeasible,
    RegularityViolation,
    GridMismatch,
    PeriodMismatch,
    InvalidConfig,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status and a machine-parseable message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace relaycancel
