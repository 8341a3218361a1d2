#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cityscale {

enum class ErrorCode {
    // configuration / preconditions
    InvalidArgument,
    MissingPath,
    // file contents
    IoFailure,
    ParseError,
    MissingColumn,
    NegativePopulation,
    DuplicateCell,
    NegativeDistance,
    AsymmetricConflict,
    // analysis
    EmptyCity,
    MissingCity,
    ZeroNationalTotal,
    EmptyPanel,
    EmptyBaseYear,
    ZeroPeak,
    EmptySamples,
    NonpositiveBandwidth,
    NonpositiveShare,
    FewerThanTwoPoints,
    DegenerateRegressor,
    EmptyGraph,
    UnknownNode,
    TooFewCities,
    MissingDistance,
    RankExceedsCount,
    PoolTooSmall,
};

std::string_view to_string(ErrorCode code) noexcept;

// True for errors that describe a bad invocation rather than bad data.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cityscale
