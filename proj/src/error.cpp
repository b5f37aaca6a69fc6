#include "skewlab/error.hpp"

namespace skewlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::structure: return "structure";
    case ErrorKind::genericity: return "genericity";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace skewlab
