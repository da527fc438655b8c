#include "fruitbench/error.hpp"

namespace fruitbench {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kIntegrity:
      return "integrity";
    case ErrorKind::kUndefinedInput:
      return "undefined_input";
    case ErrorKind::kTamper:
      return "tamper";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace fruitbench
