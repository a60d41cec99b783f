#pragma once

#include <stdexcept>
#include <string>

namespace psb {

/// Library-wide error type. The kind tells callers which contract was
/// violated; the message carries the offending values.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    parameter,          // invalid argument or configuration value
    sampling,           // evaluator produced a non-finite value
    catalog,            // unknown symbol / exponent identifier
    capability,         // requested derivative order not available
    path,               // apply path incompatible with the symbol
    precondition,       // operation precondition (certification, exponent) failed
    degenerate_family,  // every family member was guard-skipped
    norm_undefined,     // norm requested from a failed certificate
    io,                 // file format or filesystem problem
    compute             // iteration cap or numeric breakdown
  };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

  static Error parameter(const std::string& m) { return {Kind::parameter, m}; }
  static Error sampling(const std::string& m) { return {Kind::sampling, m}; }
  static Error catalog(const std::string& m) { return {Kind::catalog, m}; }
  static Error capability(const std::string& m) { return {Kind::capability, m}; }
  static Error path(const std::string& m) { return {Kind::path, m}; }
  static Error precondition(const std::string& m) { return {Kind::precondition, m}; }
  static Error degenerate_family(const std::string& m) { return {Kind::degenerate_family, m}; }
  static Error norm_undefined(const std::string& m) { return {Kind::norm_undefined, m}; }
  static Error io(const std::string& m) { return {Kind::io, m}; }
  static Error compute(const std::string& m) { return {Kind::compute, m}; }

 private:
  Kind kind_;
};

}  // namespace psb
