#pragma once

#include <stdexcept>
#include <string>

namespace fruitbench {

// Error taxonomy shared by every module. The CLI maps ErrorKind onto its
// exit-code contract: kIo -> 2, everything else -> 1.
enum class ErrorKind {
  kValidation,
  kParse,
  kIntegrity,
  kUndefinedInput,
  kTamper,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

// Malformed JSON. `byte_offset` points at the offending byte in the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(ErrorKind::kParse, message), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// A reference (image id, category id) that does not resolve.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error(ErrorKind::kIntegrity, message) {}
};

class UndefinedInputError : public Error {
 public:
  explicit UndefinedInputError(const std::string& message)
      : Error(ErrorKind::kUndefinedInput, message) {}
};

class TamperError : public Error {
 public:
  explicit TamperError(const std::string& message)
      : Error(ErrorKind::kTamper, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

}  // namespace fruitbench
