#include "cityscale/error.hpp"

namespace cityscale {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingPath: return "MissingPath";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NegativePopulation: return "NegativePopulation";
        case ErrorCode::DuplicateCell: return "DuplicateCell";
        case ErrorCode::NegativeDistance: return "NegativeDistance";
        case ErrorCode::AsymmetricConflict: return "AsymmetricConflict";
        case ErrorCode::EmptyCity: return "EmptyCity";
        case ErrorCode::MissingCity: return "MissingCity";
        case ErrorCode::ZeroNationalTotal: return "ZeroNationalTotal";
        case ErrorCode::EmptyPanel: return "EmptyPanel";
        case ErrorCode::EmptyBaseYear: return "EmptyBaseYear";
        case ErrorCode::ZeroPeak: return "ZeroPeak";
        case ErrorCode::EmptySamples: return "EmptySamples";
        case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
        case ErrorCode::NonpositiveShare: return "NonpositiveShare";
        case ErrorCode::FewerThanTwoPoints: return "FewerThanTwoPoints";
        case ErrorCode::DegenerateRegressor: return "DegenerateRegressor";
        case ErrorCode::EmptyGraph: return "EmptyGraph";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::TooFewCities: return "TooFewCities";
        case ErrorCode::MissingDistance: return "MissingDistance";
        case ErrorCode::RankExceedsCount: return "RankExceedsCount";
        case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    return code == ErrorCode::InvalidArgument || code == ErrorCode::MissingPath;
}

}  // namespace cityscale
