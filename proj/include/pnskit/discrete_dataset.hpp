#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pnskit {

// Reserved cell value for "missing, kept on purpose" (recode rules with the
// keep policy). Never a declared level; analyses drop such rows per analysis.
inline constexpr int kMissingLevel = -1;

struct DiscreteVariable {
  std::string name;
  std::vector<int> levels;  // sorted, distinct, never kMissingLevel
  bool allows_missing = false;

  std::size_t cardinality() const { return levels.size(); }
  // Position of `level` in `levels`; throws UnknownLevel.
  std::size_t level_index(int level) const;
  bool has_level(int level) const;

  friend bool operator==(const DiscreteVariable&, const DiscreteVariable&) = default;
};

// Column-major table of categorical observations.
class DiscreteDataset {
 public:
  DiscreteDataset() = default;
  // Validates every cell against its variable's levels (MalformedDataset).
  DiscreteDataset(std::vector<DiscreteVariable> variables, std::vector<std::vector<int>> columns);

  std::size_t n() const { return n_; }
  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<DiscreteVariable>& variables() const { return variables_; }
  const DiscreteVariable& variable(std::size_t i) const { return variables_[i]; }
  // Throws UnknownVariable.
  std::size_t index_of(std::string_view name) const;
  bool has_variable(std::string_view name) const;
  std::vector<std::string> names() const;

  std::span<const int> column(std::size_t i) const { return columns_[i]; }
  int at(std::size_t row, std::size_t var) const { return columns_[var][row]; }
  std::size_t count_missing() const;

  // Rows at the given indices, in the given order.
  DiscreteDataset select_rows(std::span<const std::size_t> rows) const;
  // Keeps only the named variables, in the given order.
  DiscreteDataset select_variables(std::span<const std::string> names) const;

  // Free-form provenance written into the file header (generator, seed...).
  std::map<std::string, std::string> metadata;

  friend bool operator==(const DiscreteDataset& a, const DiscreteDataset& b) {
    return a.variables_ == b.variables_ && a.columns_ == b.columns_;
  }

 private:
  std::vector<DiscreteVariable> variables_;
  std::vector<std::vector<int>> columns_;
  std::size_t n_ = 0;
};

// Columnar structured-text file:
//   {"format": "pns-dataset", "version": "v1", "n": N, "metadata": {...},
//    "variables": [{"name": "X", "levels": [0, 1], "allows_missing": false}],
//    "columns": {"X": [...], ...}}
std::string write_dataset_json(const DiscreteDataset& d);
DiscreteDataset parse_dataset_json(std::string_view text);

// Integer-coded CSV; levels are inferred from the observed values and empty
// cells become kMissingLevel.
DiscreteDataset parse_dataset_csv(std::string_view text);

// Dispatches on content: JSON when the first non-blank character is '{'.
DiscreteDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const DiscreteDataset& d, const std::filesystem::path& path);

}  // namespace pnskit
