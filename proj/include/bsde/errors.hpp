#pragma once

#include <stdexcept>
#include <string>

namespace bsde {

// Error taxonomy used across the library. Each kind maps to one of the
// documented failure modes; the CLI translates kinds into exit codes.
enum class ErrorKind {
  InvalidArgument,    // bad user input (partition, config values, sizes)
  GeneratorNotLinear, // linear machinery requested on a nonlinear generator
  UnsupportedProblem, // operation requires a capability the problem lacks
  NoReference,        // error norms requested without a reference solution
  PicardDiverged,     // fixed-point iteration failed to contract
  TooFewLevels,       // rate fit needs at least three positive-error levels
  Resource,           // allocation failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace bsde
