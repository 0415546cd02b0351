#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairiv {

// Every failure that is data- or estimand-specific carries a machine-readable
// condition string (e.g. "EmptyCell(1,1)") so callers can omit the affected
// estimand from a report instead of aborting the run.
enum class ErrorCode {
    MissingColumn,
    NonBinaryValue,
    BadUnitIndex,
    GroupSizeNot2,
    NonFiniteOutcome,
    InconsistentStratum,
    EmptyCell,
    OsnViolated,
    DegenerateDenominator,
    ZeroFirstStage,
    RankDeficientFirstStage,
    EmptyStratumCell,
    DegeneratePropensity,
    InvalidSpec,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string condition, const std::string& detail = "")
        : std::runtime_error(detail.empty() ? condition : condition + ": " + detail),
          code_(code),
          condition_(std::move(condition)) {}

    ErrorCode code() const { return code_; }
    const std::string& condition() const { return condition_; }

private:
    ErrorCode code_;
    std::string condition_;
};

inline Error empty_cell_error(int z_own, int z_peer, const std::string& detail = "") {
    return Error(ErrorCode::EmptyCell,
                 "EmptyCell(" + std::to_string(z_own) + "," + std::to_string(z_peer) + ")", detail);
}

inline Error empty_stratum_cell_error(const std::string& stratum, int z_own, int z_peer) {
    return Error(ErrorCode::EmptyStratumCell,
                 "EmptyStratumCell(" + stratum + "," + std::to_string(z_own) + "," +
                     std::to_string(z_peer) + ")");
}

inline Error degenerate_denominator_error(std::string_view name) {
    return Error(ErrorCode::DegenerateDenominator,
                 "DegenerateDenominator:" + std::string(name));
}

inline Error degenerate_propensity_error(const std::string& stratum, int z_own, int z_peer) {
    return Error(ErrorCode::DegeneratePropensity,
                 "DegeneratePropensity(" + stratum + "," + std::to_string(z_own) + "," +
                     std::to_string(z_peer) + ")");
}

inline Error osn_violated_error(long hard_count) {
    return Error(ErrorCode::OsnViolated, "OSNViolated",
                 std::to_string(hard_count) + " record(s) with d=1 and z=0");
}

}  // namespace pairiv
