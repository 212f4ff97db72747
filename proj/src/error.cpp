#include "lexcraft/error.hpp"

namespace lexcraft {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPalette: return "EmptyPalette";
    case ErrorCode::NonPaletteColor: return "NonPaletteColor";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::EmptyKeywords: return "EmptyKeywords";
    case ErrorCode::UnknownImage: return "UnknownImage";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InvalidColor: return "InvalidColor";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::ResizeNotAllowed: return "ResizeNotAllowed";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::AlreadyGrouped: return "AlreadyGrouped";
    case ErrorCode::SubjectInGroup: return "SubjectInGroup";
    case ErrorCode::TooFewMembers: return "TooFewMembers";
    case ErrorCode::InvalidEndpoint: return "InvalidEndpoint";
    case ErrorCode::DuplicateLink: return "DuplicateLink";
    case ErrorCode::NameTaken: return "NameTaken";
    case ErrorCode::BadName: return "BadName";
    case ErrorCode::RevisionConflict: return "RevisionConflict";
    case ErrorCode::BadCommand: return "BadCommand";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::StrictWarnings: return "StrictWarnings";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::HashMismatch: return "HashMismatch";
    case ErrorCode::UnknownEntry: return "UnknownEntry";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownLexicon: return "UnknownLexicon";
    case ErrorCode::UnknownArtifact: return "UnknownArtifact";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace lexcraft
