#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hiagg {

enum class ErrorKind {
  UnknownAssetType,
  MissingBuildYear,
  MissingCost,
  NonPositiveCost,
  MissingHeader,
  DuplicateAssetId,
  HiOutOfRange,
  MalformedRow,
  NegativeSeverity,
  WeightOutOfClassRange,
  UnknownClass,
  MalformedCatalog,
  MalformedReport,
  InfeasibleSpec,
  InvalidConfig,
  UnwritableOutput,
  Unreadable,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::UnknownAssetType: return "UnknownAssetType";
  case ErrorKind::MissingBuildYear: return "MissingBuildYear";
  case ErrorKind::MissingCost: return "MissingCost";
  case ErrorKind::NonPositiveCost: return "NonPositiveCost";
  case ErrorKind::MissingHeader: return "MissingHeader";
  case ErrorKind::DuplicateAssetId: return "DuplicateAssetId";
  case ErrorKind::HiOutOfRange: return "HiOutOfRange";
  case ErrorKind::MalformedRow: return "MalformedRow";
  case ErrorKind::NegativeSeverity: return "NegativeSeverity";
  case ErrorKind::WeightOutOfClassRange: return "WeightOutOfClassRange";
  case ErrorKind::UnknownClass: return "UnknownClass";
  case ErrorKind::MalformedCatalog: return "MalformedCatalog";
  case ErrorKind::MalformedReport: return "MalformedReport";
  case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
  case ErrorKind::InvalidConfig: return "InvalidConfig";
  case ErrorKind::UnwritableOutput: return "UnwritableOutput";
  case ErrorKind::Unreadable: return "Unreadable";
  }
  return "Unknown";
}

/// Where an error originated: a file (or stream name) and, when known, a
/// 1-based line number. `detail` carries non-line locations such as a JSON
/// key path.
struct Provenance {
  std::string source;
  std::optional<std::size_t> line;
  std::string detail;

  std::string str() const {
    std::string out = source;
    if (line)
      out += ":" + std::to_string(*line);
    if (!detail.empty())
      out += (out.empty() ? "" : ": ") + detail;
    return out;
  }
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message, Provenance where = {})
      : std::runtime_error(format(kind, message, where)), kind_(kind),
        message_(std::move(message)), where_(std::move(where)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string &message() const noexcept { return message_; }
  const Provenance &where() const noexcept { return where_; }

private:
  static std::string format(ErrorKind kind, const std::string &message,
                            const Provenance &where) {
    std::string prefix = where.str();
    std::string out;
    if (!prefix.empty())
      out = prefix + ": ";
    out += std::string(to_string(kind)) + ": " + message;
    return out;
  }

  ErrorKind kind_;
  std::string message_;
  Provenance where_;
};

} // namespace hiagg
