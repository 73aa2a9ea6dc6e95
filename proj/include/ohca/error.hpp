#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ohca {

// Machine-readable failure categories. The CLI prints the name on stderr.
enum class ErrorKind {
  EmptyTrace,
  InvalidTrace,
  DegenerateTraffic,
  ZeroPacketCount,
  DimensionMismatch,
  InfeasibleMinimum,
  SeriesExceedsBudget,
  NoFeasibleL,
  NoAdmissibleSeries,
  CaseInapplicable,
  ZeroProbability,
  UnknownStrategy,
  MissingBounds,
  EncodingError,
  EmptyDataset,
  InvalidModel,
  InvalidArgument,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyTrace: return "EmptyTrace";
    case ErrorKind::InvalidTrace: return "InvalidTrace";
    case ErrorKind::DegenerateTraffic: return "DegenerateTraffic";
    case ErrorKind::ZeroPacketCount: return "ZeroPacketCount";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InfeasibleMinimum: return "InfeasibleMinimum";
    case ErrorKind::SeriesExceedsBudget: return "SeriesExceedsBudget";
    case ErrorKind::NoFeasibleL: return "NoFeasibleL";
    case ErrorKind::NoAdmissibleSeries: return "NoAdmissibleSeries";
    case ErrorKind::CaseInapplicable: return "CaseInapplicable";
    case ErrorKind::ZeroProbability: return "ZeroProbability";
    case ErrorKind::UnknownStrategy: return "UnknownStrategy";
    case ErrorKind::MissingBounds: return "MissingBounds";
    case ErrorKind::EncodingError: return "EncodingError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace ohca
