#include "tsfc/error.hpp"

namespace tsfc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnequalLength: return "UnequalLength";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::KernelTooLarge: return "KernelTooLarge";
    case ErrorKind::EmptyActivations: return "EmptyActivations";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::PathTooShort: return "PathTooShort";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::ClassMissing: return "ClassMissing";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::UnsupportedK: return "UnsupportedK";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::MissingLengths: return "MissingLengths";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tsfc
