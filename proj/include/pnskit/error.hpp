#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnskit {

// Every failure the library reports carries one of these codes. The names are
// part of the CLI contract: error messages start with the verbatim name.
enum class Errc {
  // graph
  CycleDetected,
  UnknownNode,
  DuplicateEdge,
  DuplicateNode,
  OverlappingSets,
  MalformedGraphFile,
  // dataset
  MalformedHeader,
  UnsupportedVersion,
  TruncatedRecord,
  RaggedRow,
  EmptyHeader,
  MissingKey,
  DuplicateKey,
  DuplicateColumn,
  UnmappedValue,
  InvalidConfig,
  MalformedDataset,
  // estimate
  UnknownVariable,
  UnknownLevel,
  EmptyCondition,
  EmptyTable,
  TableTooLarge,
  PositivityViolation,
  // bounds
  InvalidQuantities,
  WeightMismatch,
  NonBinaryVariable,
  NoAdmissibleSet,
  // oracle
  StateSpaceTooLarge,
  InvalidScm,
  // discovery
  DegenerateTable,
  // subgroup
  InvalidMargin,
  InvalidConfidence,
  InvalidSubgroup,
  // io
  IoError,
};

constexpr std::string_view error_name(Errc code) {
  switch (code) {
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::OverlappingSets: return "OverlappingSets";
    case Errc::MalformedGraphFile: return "MalformedGraphFile";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::TruncatedRecord: return "TruncatedRecord";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::EmptyHeader: return "EmptyHeader";
    case Errc::MissingKey: return "MissingKey";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::DuplicateColumn: return "DuplicateColumn";
    case Errc::UnmappedValue: return "UnmappedValue";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::MalformedDataset: return "MalformedDataset";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::UnknownLevel: return "UnknownLevel";
    case Errc::EmptyCondition: return "EmptyCondition";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::TableTooLarge: return "TableTooLarge";
    case Errc::PositivityViolation: return "PositivityViolation";
    case Errc::InvalidQuantities: return "InvalidQuantities";
    case Errc::WeightMismatch: return "WeightMismatch";
    case Errc::NonBinaryVariable: return "NonBinaryVariable";
    case Errc::NoAdmissibleSet: return "NoAdmissibleSet";
    case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case Errc::InvalidScm: return "InvalidScm";
    case Errc::DegenerateTable: return "DegenerateTable";
    case Errc::InvalidMargin: return "InvalidMargin";
    case Errc::InvalidConfidence: return "InvalidConfidence";
    case Errc::InvalidSubgroup: return "InvalidSubgroup";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }
  // Message without the leading error name.
  std::string detail() const { return std::string(what()).substr(name().size() + 2); }

 private:
  Errc code_;
};

}  // namespace pnskit
