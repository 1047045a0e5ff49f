#include "litho/error.hpp"

namespace litho {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::domain: return "domain";
    case ErrorKind::training: return "training";
    case ErrorKind::internal: return "internal";
    case ErrorKind::oracle: return "oracle";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, std::string op, const std::string& message,
             std::vector<long> ids)
    : std::runtime_error(module + "::" + op + ": " + message),
      kind_(kind),
      module_(std::move(module)),
      op_(std::move(op)),
      ids_(std::move(ids)) {}

}  // namespace litho
