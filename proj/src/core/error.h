#pragma once

#include <stdexcept>
#include <string>

namespace entailre {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kIo,
  kNotFound,
  kBackend,
  kConflict,
  kInternal,
};

// Every failure raised by the core library carries one of the codes above so
// the C API and the HTTP service can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace entailre
