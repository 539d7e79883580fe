#pragma once

#include <stdexcept>
#include <string>

namespace animesh {

// Error categories map 1:1 onto the CLI exit codes (validation=3, io=4,
// numerical=5). Library code throws; the CLI catches and translates.
enum class ErrorCategory { validation, io, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCategory::validation, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::io, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorCategory::numerical, message) {}
};

}  // namespace animesh
