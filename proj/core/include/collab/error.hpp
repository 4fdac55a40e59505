#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collab {

/// Coarse error classes. The CLI prints the category name so scripts can
/// branch on it without parsing messages.
enum class ErrorCategory {
  Io,
  Config,
  Schema,
  Encode,
  Argument,
  Training,
  Prediction,
  CorruptLog,
  Sizing,
  Metric,
  Version,
  Truncated,
  Checksum,
  Internal,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace collab
