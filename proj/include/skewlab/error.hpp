#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  input,         // malformed argument or inadmissible word
  domain,        // inverse map evaluated outside the image
  structure,     // contradicts a structural theorem (non-transitive chain, broken alternation)
  genericity,    // one of the three genericity conditions fails
  convergence,   // iteration cap reached
  not_found,     // bounded search exhausted
  precondition,  // operation called outside its contract
  parameter,     // numerical parameter out of range
  io,            // file or parse failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace skewlab
