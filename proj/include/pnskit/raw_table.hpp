#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pnskit {

enum class VariableKind { Continuous, Categorical, Text };

// A raw cell: missing, numeric, or text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

struct VariableSchema {
  std::string name;
  std::string label;
  VariableKind kind = VariableKind::Continuous;
  std::vector<double> levels;         // categorical only
  std::set<double> missing_codes;     // raw values treated as missing

  // Throws InvalidConfig if levels repeat or overlap missing_codes.
  void validate() const;
  // True for an empty cell or a numeric cell listed in missing_codes.
  bool is_missing_value(const Cell& c) const;
};

// Parsed file contents. Immutable by convention once returned.
struct RawTable {
  std::vector<VariableSchema> schema;
  std::vector<std::vector<Cell>> rows;
  std::optional<std::string> key_variable;

  std::size_t num_rows() const { return rows.size(); }
  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws UnknownVariable.
  std::size_t column(std::string_view name) const;
};

// Inner join on `key`: only keys present in every table survive. Output
// columns are the first table's columns followed by each later table's
// non-key columns; rows follow the first table's order. Throws MissingKey,
// DuplicateKey, DuplicateColumn.
RawTable merge_by_key(std::span<const RawTable> tables, std::string_view key);

struct DropResult {
  RawTable table;
  std::size_t dropped = 0;
  bool all_dropped = false;
};

// Removes rows whose cells in `vars` are missing per the schema.
DropResult drop_missing(const RawTable& t, std::span<const std::string> vars);

}  // namespace pnskit
