#pragma once

#include <stdexcept>
#include <string>

namespace calev {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  Usage = 1,        // bad parameters or flag combinations
  Validation = 2,   // malformed input data, violated invariants
  Alignment = 3,    // uid sets of annotations and predictions disagree
  Computation = 4,  // empty inputs, undefined divergences
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

const char* error_kind_name(ErrorKind kind);

}  // namespace calev
