#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace textsculpt {

enum class ErrorCode {
  // text_corpus
  EmptyLexicon,
  MalformedLine,
  // typesetting
  NoFontsFound,
  DuplicateFontId,
  MissingGlyph,
  Overflow,
  // composer
  NoSafeRegion,
  OutOfBounds,
  // task_factory
  InsufficientSceneText,
  AmbiguousTarget,
  MissingTemplate,
  // eval_metrics
  InvalidNEdit,
  EmptyBackground,
  DimensionMismatch,
  EmptyReportSet,
  // model_clients
  FixtureMissing,
  RemoteUnavailable,
  MalformedResponse,
  // harness
  DuplicateId,
  SchemaViolation,
  MissingEditedImage,
  InvalidConfig,
  // shared plumbing
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so that
/// callers (and the run manifest) can record it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace textsculpt
