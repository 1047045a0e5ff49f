#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace litho {

enum class ErrorKind {
  config,    // inconsistent or invalid parameters
  io,        // missing/unreadable/unwritable files
  format,    // malformed input files
  domain,    // argument outside the mathematical domain
  training,  // non-finite gradients and similar learner failures
  internal,  // broken internal invariant (solver or certificate bug)
  oracle,    // label oracle failure
};

std::string_view to_string(ErrorKind kind);

/// Base exception for everything the library throws on purpose.
///
/// Carries the module and operation that raised it plus any offending ids, so
/// the CLI can render a machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string op, const std::string& message,
        std::vector<long> ids = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& op() const noexcept { return op_; }
  const std::vector<long>& ids() const noexcept { return ids_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string op_;
  std::vector<long> ids_;
};

}  // namespace litho
