#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexcraft {

enum class ErrorCode {
    // colorlab
    EmptyInput,
    InvalidK,
    DimensionMismatch,
    EmptyPalette,
    NonPaletteColor,
    // images / moodboard
    DecodeError,
    EmptyMask,
    KindMismatch,
    ProviderError,
    EmptyKeywords,
    UnknownImage,
    UnknownToken,
    InvalidGeometry,
    InvalidColor,
    // lexicon
    UnknownSource,
    EmptyText,
    ResizeNotAllowed,
    UnknownInstance,
    UnknownGroup,
    UnknownLink,
    AlreadyGrouped,
    SubjectInGroup,
    TooFewMembers,
    InvalidEndpoint,
    DuplicateLink,
    NameTaken,
    BadName,
    RevisionConflict,
    BadCommand,
    // compiler
    ValidationFailed,
    StrictWarnings,
    // renderer
    BackendError,
    // history
    HashMismatch,
    UnknownEntry,
    // service / io
    UnknownSession,
    UnknownLexicon,
    UnknownArtifact,
    FormatError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every contract violation in the engine. The code
/// is the stable identifier surfaced over the wire; details carries structured
/// context such as diagnostics.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), code_(code), details_(std::move(details))
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

} // namespace lexcraft
