#include "affinity/error.hpp"

namespace affinity {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoSharedStimuli: return "NoSharedStimuli";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::MissingProfile: return "MissingProfile";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::EmptySlotVocabulary: return "EmptySlotVocabulary";
    case ErrorCode::NoMappedCategory: return "NoMappedCategory";
    case ErrorCode::InsufficientVocabulary: return "InsufficientVocabulary";
    case ErrorCode::EmptyItemSet: return "EmptyItemSet";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::EmptyComparison: return "EmptyComparison";
    case ErrorCode::UnclassifiedCandidate: return "UnclassifiedCandidate";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::SessionNotActive: return "SessionNotActive";
    case ErrorCode::IncompleteRatings: return "IncompleteRatings";
    case ErrorCode::OutOfRangeRating: return "OutOfRangeRating";
    case ErrorCode::LexiconUnavailable: return "LexiconUnavailable";
    case ErrorCode::DuplicateActiveSession: return "DuplicateActiveSession";
    case ErrorCode::UnknownCandidate: return "UnknownCandidate";
    case ErrorCode::UnknownSession: return "UnknownSession";
    }
    return "Unknown";
}

} // namespace affinity
