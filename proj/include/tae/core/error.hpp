#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tae {

using json = nlohmann::json;

/**
 * @brief Every failure case the engine can report.
 *
 * The snake_case spelling returned by error_code_name() is the stable
 * wire code used by the HTTP API and must not change between releases.
 */
enum class ErrorCode {
    // core model
    DuplicateClass,
    InvalidField,
    UnknownClass,
    UnknownField,
    RangeViolation,
    CorruptDocument,
    UnsupportedSchemaVersion,
    DanglingReference,
    OrderConflict,
    UnknownAsset,
    // timeline
    Overlap,
    UnknownTrack,
    UnknownClip,
    UnknownAnimation,
    PayloadMismatch,
    InvalidDuration,
    OutOfRange,
    NotAdjacent,
    TrackMismatch,
    UnknownPreset,
    OutOfClipRange,
    // script
    NonTextTrack,
    NotTextClip,
    OffsetOutOfRange,
    InvalidAnchor,
    EmptyRange,
    // tools
    UnknownTool,
    SchemaViolation,
    // agents / llm
    ProviderError,
    UnknownSuggestion,
    StaleSuggestion,
    // chat
    UnknownProject,
    UnknownSession,
    SessionBusy,
    WrongState,
    InvalidAnswer,
    // service
    BadRequest,
    Internal,
};

std::string_view error_code_name(ErrorCode code);

/// Every code, in declaration order. Used for API parity checks.
const std::vector<ErrorCode>& all_error_codes();

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, json detail = json::object())
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const json& detail() const noexcept { return detail_; }

    [[nodiscard]] json to_json() const;

private:
    ErrorCode code_;
    json detail_;
};

}  // namespace tae
