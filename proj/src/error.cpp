#include "textsculpt/error.hpp"

namespace textsculpt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NoFontsFound: return "NoFontsFound";
    case ErrorCode::DuplicateFontId: return "DuplicateFontId";
    case ErrorCode::MissingGlyph: return "MissingGlyph";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NoSafeRegion: return "NoSafeRegion";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InsufficientSceneText: return "InsufficientSceneText";
    case ErrorCode::AmbiguousTarget: return "AmbiguousTarget";
    case ErrorCode::MissingTemplate: return "MissingTemplate";
    case ErrorCode::InvalidNEdit: return "InvalidNEdit";
    case ErrorCode::EmptyBackground: return "EmptyBackground";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyReportSet: return "EmptyReportSet";
    case ErrorCode::FixtureMissing: return "FixtureMissing";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::MissingEditedImage: return "MissingEditedImage";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace textsculpt
