#include "harvest/error.hpp"

namespace harvest {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Solver: return "solver";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error("[" + module + "] " + message),
      kind_(kind),
      module_(std::move(module)) {}

void fail(ErrorKind kind, std::string module, const std::string& message) {
    throw Error(kind, std::move(module), message);
}

}  // namespace harvest
