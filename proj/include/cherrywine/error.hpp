#ifndef CHERRYWINE_ERROR_HPP
#define CHERRYWINE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cherrywine {

// Failure classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  usage = 2,      // bad arguments or violated preconditions
  integrity = 3,  // malformed data or model files
  numerical = 4,  // degenerate numerics (constant columns, singular fits)
};

// Every library failure carries the module that raised it so the CLI can
// print "[module] message" without having to know where it came from.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error("[" + module + "] " + message),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline Error usage_error(std::string module, const std::string& message) {
  return Error(ErrorKind::usage, std::move(module), message);
}

inline Error integrity_error(std::string module, const std::string& message) {
  return Error(ErrorKind::integrity, std::move(module), message);
}

inline Error numerical_error(std::string module, const std::string& message) {
  return Error(ErrorKind::numerical, std::move(module), message);
}

}  // namespace cherrywine

#endif  // CHERRYWINE_ERROR_HPP
