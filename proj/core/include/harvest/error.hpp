#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harvest {

/// Broad failure category; the CLI maps it onto an exit code.
enum class ErrorKind {
    Config,   ///< invalid model/config/argument (exit 2)
    Domain,   ///< argument outside an operation's domain (exit 2)
    Numeric,  ///< a numerical procedure failed or could not certify its output (exit 3)
    Solver,   ///< LP solver failure such as the cycling guard (exit 3)
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library error carrying the failing module and a category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

[[noreturn]] void fail(ErrorKind kind, std::string module, const std::string& message);

}  // namespace harvest
