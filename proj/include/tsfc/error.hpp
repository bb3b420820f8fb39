#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsfc {

/// Failure categories raised across the toolkit.
enum class ErrorKind {
  // dataset
  UnequalLength,
  MissingValue,
  MalformedHeader,
  UnknownLabel,
  InvalidSize,
  // kernels
  KernelTooLarge,
  EmptyActivations,
  TooShort,
  BudgetTooSmall,
  // featurebank / intervals / signature
  WindowTooShort,
  SeriesTooShort,
  PathTooShort,
  DimensionMismatch,
  // classifiers
  SingularSystem,
  ClassMissing,
  WidthMismatch,
  // pipeline
  RowMismatch,
  EmptyPool,
  UnknownPreset,
  InvalidConfig,
  // stats
  DegenerateTable,
  UnsupportedK,
  AllZeroDifferences,
  MissingLengths,
  // io
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tsfc
