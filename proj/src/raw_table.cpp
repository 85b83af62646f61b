#include "pnskit/raw_table.hpp"

#include <map>
#include <unordered_set>

#include "pnskit/error.hpp"

namespace pnskit {

void VariableSchema::validate() const {
  std::set<double> seen;
  for (double l : levels) {
    if (!seen.insert(l).second) {
      throw Error(Errc::InvalidConfig, name + ": level " + std::to_string(l) + " declared twice");
    }
    if (missing_codes.count(l)) {
      throw Error(Errc::InvalidConfig, name + ": level " + std::to_string(l) + " is also a missing code");
    }
  }
}

bool VariableSchema::is_missing_value(const Cell& c) const {
  if (is_missing(c)) return true;
  if (const double* v = std::get_if<double>(&c)) return missing_codes.count(*v) > 0;
  return false;
}

std::optional<std::size_t> RawTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t RawTable::column(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw Error(Errc::UnknownVariable, "'" + std::string(name) + "' is not a column");
}

namespace {

// Keys compare numerically or textually; numeric keys sort before text keys.
struct KeyLess {
  bool operator()(const Cell& a, const Cell& b) const { return a < b; }
};

std::string key_text(const Cell& c) {
  if (const double* v = std::get_if<double>(&c)) return std::to_string(*v);
  if (const std::string* s = std::get_if<std::string>(&c)) return *s;
  return "<missing>";
}

std::map<Cell, std::size_t, KeyLess> index_by_key(const RawTable& t, std::size_t key_col, std::size_t table_no) {
  std::map<Cell, std::size_t, KeyLess> idx;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const Cell& k = t.rows[r][key_col];
    if (is_missing(k)) {
      throw Error(Errc::MissingKey, "table " + std::to_string(table_no) + " row " + std::to_string(r) + " has no key value");
    }
    if (!idx.emplace(k, r).second) {
      throw Error(Errc::DuplicateKey, "table " + std::to_string(table_no) + " repeats key " + key_text(k));
    }
  }
  return idx;
}

}  // namespace

RawTable merge_by_key(std::span<const RawTable> tables, std::string_view key) {
  if (tables.empty()) return RawTable{};

  std::vector<std::size_t> key_cols;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    auto col = tables[t].find_column(key);
    if (!col) throw Error(Errc::MissingKey, "table " + std::to_string(t) + " has no column '" + std::string(key) + "'");
    key_cols.push_back(*col);
  }

  RawTable out;
  out.key_variable = std::string(key);
  std::unordered_set<std::string> names;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (std::size_t c = 0; c < tables[t].schema.size(); ++c) {
      if (t > 0 && c == key_cols[t]) continue;
      const auto& s = tables[t].schema[c];
      if (!names.insert(s.name).second) {
        throw Error(Errc::DuplicateColumn, "column '" + s.name + "' appears in more than one table");
      }
      out.schema.push_back(s);
    }
  }

  std::vector<std::map<Cell, std::size_t, KeyLess>> indexes;
  for (std::size_t t = 0; t < tables.size(); ++t) indexes.push_back(index_by_key(tables[t], key_cols[t], t));

  for (const auto& row : tables[0].rows) {
    const Cell& k = row[key_cols[0]];
    std::vector<std::size_t> hits;
    bool everywhere = true;
    for (std::size_t t = 1; t < tables.size(); ++t) {
      auto it = indexes[t].find(k);
      if (it == indexes[t].end()) {
        everywhere = false;
        break;
      }
      hits.push_back(it->second);
    }
    if (!everywhere) continue;

    std::vector<Cell> merged = row;
    for (std::size_t t = 1; t < tables.size(); ++t) {
      const auto& other = tables[t].rows[hits[t - 1]];
      for (std::size_t c = 0; c < other.size(); ++c) {
        if (c != key_cols[t]) merged.push_back(other[c]);
      }
    }
    out.rows.push_back(std::move(merged));
  }
  return out;
}

DropResult drop_missing(const RawTable& t, std::span<const std::string> vars) {
  std::vector<std::size_t> cols;
  for (const auto& v : vars) cols.push_back(t.column(v));

  DropResult res;
  res.table.schema = t.schema;
  res.table.key_variable = t.key_variable;
  for (const auto& row : t.rows) {
    bool missing = false;
    for (std::size_t c : cols) {
      if (t.schema[c].is_missing_value(row[c])) {
        missing = true;
        break;
      }
    }
    if (missing) {
      ++res.dropped;
    } else {
      res.table.rows.push_back(row);
    }
  }
  res.all_dropped = !t.rows.empty() && res.table.rows.empty();
  return res;
}

}  // namespace pnskit
