#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affinity {

enum class ErrorCode {
    InvalidArgument,
    NoSharedStimuli,
    DuplicateResponse,
    DimensionMismatch,
    ParseError,
    ValidationError,
    UnknownContext,
    MissingProfile,
    UnknownVariant,
    TooFewCandidates,
    EmptyModel,
    EmptySlotVocabulary,
    NoMappedCategory,
    InsufficientVocabulary,
    EmptyItemSet,
    UnknownItem,
    EmptyComparison,
    UnclassifiedCandidate,
    InvalidParams,
    StorageError,
    SessionNotActive,
    IncompleteRatings,
    OutOfRangeRating,
    LexiconUnavailable,
    DuplicateActiveSession,
    UnknownCandidate,
    UnknownSession,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI and HTTP layers can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace affinity
