#include "collab/error.hpp"

namespace collab {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Schema: return "schema";
    case ErrorCategory::Encode: return "encode";
    case ErrorCategory::Argument: return "argument";
    case ErrorCategory::Training: return "training";
    case ErrorCategory::Prediction: return "prediction";
    case ErrorCategory::CorruptLog: return "corrupt-log";
    case ErrorCategory::Sizing: return "sizing";
    case ErrorCategory::Metric: return "metric";
    case ErrorCategory::Version: return "version";
    case ErrorCategory::Truncated: return "truncated";
    case ErrorCategory::Checksum: return "checksum";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

}  // namespace collab
