#include "tae/core/error.hpp"

#include <vector>

namespace tae {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateClass: return "duplicate_class";
        case ErrorCode::InvalidField: return "invalid_field";
        case ErrorCode::UnknownClass: return "unknown_class";
        case ErrorCode::UnknownField: return "unknown_field";
        case ErrorCode::RangeViolation: return "range_violation";
        case ErrorCode::CorruptDocument: return "corrupt_document";
        case ErrorCode::UnsupportedSchemaVersion: return "unsupported_schema_version";
        case ErrorCode::DanglingReference: return "dangling_reference";
        case ErrorCode::OrderConflict: return "order_conflict";
        case ErrorCode::UnknownAsset: return "unknown_asset";
        case ErrorCode::Overlap: return "overlap";
        case ErrorCode::UnknownTrack: return "unknown_track";
        case ErrorCode::UnknownClip: return "unknown_clip";
        case ErrorCode::UnknownAnimation: return "unknown_animation";
        case ErrorCode::PayloadMismatch: return "payload_mismatch";
        case ErrorCode::InvalidDuration: return "invalid_duration";
        case ErrorCode::OutOfRange: return "out_of_range";
        case ErrorCode::NotAdjacent: return "not_adjacent";
        case ErrorCode::TrackMismatch: return "track_mismatch";
        case ErrorCode::UnknownPreset: return "unknown_preset";
        case ErrorCode::OutOfClipRange: return "out_of_clip_range";
        case ErrorCode::NonTextTrack: return "non_text_track";
        case ErrorCode::NotTextClip: return "not_text_clip";
        case ErrorCode::OffsetOutOfRange: return "offset_out_of_range";
        case ErrorCode::InvalidAnchor: return "invalid_anchor";
        case ErrorCode::EmptyRange: return "empty_range";
        case ErrorCode::UnknownTool: return "unknown_tool";
        case ErrorCode::SchemaViolation: return "schema_violation";
        case ErrorCode::ProviderError: return "provider_error";
        case ErrorCode::UnknownSuggestion: return "unknown_suggestion";
        case ErrorCode::StaleSuggestion: return "stale_suggestion";
        case ErrorCode::UnknownProject: return "unknown_project";
        case ErrorCode::UnknownSession: return "unknown_session";
        case ErrorCode::SessionBusy: return "session_busy";
        case ErrorCode::WrongState: return "wrong_state";
        case ErrorCode::InvalidAnswer: return "invalid_answer";
        case ErrorCode::BadRequest: return "bad_request";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

const std::vector<ErrorCode>& all_error_codes() {
    static const std::vector<ErrorCode> codes = [] {
        std::vector<ErrorCode> out;
        for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
            out.push_back(static_cast<ErrorCode>(i));
        }
        return out;
    }();
    return codes;
}

json Error::to_json() const {
    return {{"code", std::string(error_code_name(code_))}, {"message", what()}, {"detail", detail_}};
}

}  // namespace tae
