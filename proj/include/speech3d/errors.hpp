#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace speech3d {

// Root of every error the library raises. code() is a stable machine-readable
// string; the gateway maps each code to exactly one HTTP status.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// ---- geometry -------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse_error", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IndexError : public Error {
 public:
  IndexError(std::size_t line, const std::string& what)
      : Error("index_error", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyMeshError : public Error {
 public:
  explicit EmptyMeshError(const std::string& what) : Error("empty_mesh", what) {}
};

class InvalidMeshError : public Error {
 public:
  explicit InvalidMeshError(const std::string& what) : Error("invalid_mesh", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

// ---- vector store ---------------------------------------------------------

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : Error("dimension_mismatch", "expected dimension " + std::to_string(expected) +
                                        ", got " + std::to_string(actual)) {}
};

class PersistenceError : public Error {
 public:
  explicit PersistenceError(const std::string& what) : Error("persistence_error", what) {}
};

class CorruptIndex : public Error {
 public:
  CorruptIndex(std::size_t index, const std::string& what)
      : Error("corrupt_index", "record " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("not_found", what) {}
};

// ---- adapters -------------------------------------------------------------

class BackendTimeout : public Error {
 public:
  explicit BackendTimeout(const std::string& backend)
      : Error("backend_timeout", backend + " backend timed out") {}
};

class BackendError : public Error {
 public:
  BackendError(const std::string& backend, int status, std::string body)
      : Error("backend_error",
              backend + " backend failed with status " + std::to_string(status)),
        status_(status), body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class UnparseableReply : public Error {
 public:
  explicit UnparseableReply(const std::string& what) : Error("unparseable_reply", what) {}
};

class UnknownFixture : public Error {
 public:
  explicit UnknownFixture(const std::string& what) : Error("unknown_fixture", what) {}
};

class BadAudio : public Error {
 public:
  explicit BadAudio(const std::string& what) : Error("bad_audio", what) {}
};

// ---- pipeline -------------------------------------------------------------

class UnsupportedLanguage : public Error {
 public:
  explicit UnsupportedLanguage(const std::string& tag)
      : Error("unsupported_language", "unsupported language '" + tag + "'") {}
};

class AudioTooLong : public Error {
 public:
  explicit AudioTooLong(double seconds)
      : Error("audio_too_long",
              "audio clip is " + std::to_string(seconds) + " s, limit is 15 s") {}
};

class NoObjectsFound : public Error {
 public:
  NoObjectsFound() : Error("no_objects", "no known object in command") {}
};

class IllegalTransition : public Error {
 public:
  explicit IllegalTransition(const std::string& what) : Error("illegal_transition", what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what) : Error("invalid_state", what) {}
};

class InvalidChoice : public Error {
 public:
  explicit InvalidChoice(const std::string& what) : Error("invalid_choice", what) {}
};

class GenerationFailed : public Error {
 public:
  explicit GenerationFailed(const std::string& what) : Error("generation_failed", what) {}
};

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id)
      : Error("unknown_session", "unknown session '" + id + "'") {}
};

class UnknownAsset : public Error {
 public:
  explicit UnknownAsset(const std::string& id)
      : Error("unknown_asset", "unknown asset '" + id + "'") {}
};

class NonPositiveScale : public Error {
 public:
  NonPositiveScale() : Error("non_positive_scale", "scale factors must be > 0") {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

}  // namespace speech3d
