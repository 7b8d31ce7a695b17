#pragma once

#include <stdexcept>
#include <string>

namespace ws {

enum class ErrorCode {
  domain,        // argument outside the operation's domain
  io,            // file could not be read or written
  parse,         // malformed input text or binary
  config,        // semantically invalid configuration
  protocol,      // illegal state-machine transition
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace ws
