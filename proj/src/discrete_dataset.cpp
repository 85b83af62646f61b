#include "pnskit/discrete_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "pnskit/csv.hpp"
#include "pnskit/error.hpp"

namespace pnskit {

std::size_t DiscreteVariable::level_index(int level) const {
  auto it = std::lower_bound(levels.begin(), levels.end(), level);
  if (it == levels.end() || *it != level) {
    throw Error(Errc::UnknownLevel, "variable '" + name + "' has no level " + std::to_string(level));
  }
  return static_cast<std::size_t>(it - levels.begin());
}

bool DiscreteVariable::has_level(int level) const { return std::binary_search(levels.begin(), levels.end(), level); }

DiscreteDataset::DiscreteDataset(std::vector<DiscreteVariable> variables, std::vector<std::vector<int>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  if (variables_.size() != columns_.size()) {
    throw Error(Errc::MalformedDataset, "variable count and column count differ");
  }
  n_ = columns_.empty() ? 0 : columns_.front().size();
  std::set<std::string> names;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    auto& var = variables_[v];
    if (!names.insert(var.name).second) throw Error(Errc::MalformedDataset, "variable '" + var.name + "' repeated");
    if (!std::is_sorted(var.levels.begin(), var.levels.end()) ||
        std::adjacent_find(var.levels.begin(), var.levels.end()) != var.levels.end()) {
      throw Error(Errc::MalformedDataset, "levels of '" + var.name + "' must be sorted and distinct");
    }
    if (var.has_level(kMissingLevel)) {
      throw Error(Errc::MalformedDataset, "level " + std::to_string(kMissingLevel) + " of '" + var.name + "' is reserved");
    }
    if (columns_[v].size() != n_) throw Error(Errc::MalformedDataset, "column '" + var.name + "' has a different length");
    for (std::size_t r = 0; r < n_; ++r) {
      const int cell = columns_[v][r];
      if (cell == kMissingLevel && var.allows_missing) continue;
      if (!var.has_level(cell)) {
        throw Error(Errc::MalformedDataset, "row " + std::to_string(r) + " of '" + var.name + "' holds undeclared level " +
                                                std::to_string(cell));
      }
    }
  }
}

std::size_t DiscreteDataset::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw Error(Errc::UnknownVariable, "'" + std::string(name) + "' is not a dataset variable");
}

bool DiscreteDataset::has_variable(std::string_view name) const {
  return std::any_of(variables_.begin(), variables_.end(), [&](const auto& v) { return v.name == name; });
}

std::vector<std::string> DiscreteDataset::names() const {
  std::vector<std::string> out;
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

std::size_t DiscreteDataset::count_missing() const {
  std::size_t k = 0;
  for (const auto& col : columns_) k += static_cast<std::size_t>(std::count(col.begin(), col.end(), kMissingLevel));
  return k;
}

DiscreteDataset DiscreteDataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<int>> cols(columns_.size());
  for (std::size_t v = 0; v < columns_.size(); ++v) {
    cols[v].reserve(rows.size());
    for (std::size_t r : rows) cols[v].push_back(columns_[v].at(r));
  }
  DiscreteDataset out(variables_, std::move(cols));
  out.metadata = metadata;
  return out;
}

DiscreteDataset DiscreteDataset::select_variables(std::span<const std::string> names) const {
  std::vector<DiscreteVariable> vars;
  std::vector<std::vector<int>> cols;
  for (const auto& name : names) {
    const std::size_t i = index_of(name);
    vars.push_back(variables_[i]);
    cols.push_back(columns_[i]);
  }
  DiscreteDataset out(std::move(vars), std::move(cols));
  out.metadata = metadata;
  return out;
}

std::string write_dataset_json(const DiscreteDataset& d) {
  nlohmann::ordered_json doc;
  doc["format"] = "pns-dataset";
  doc["version"] = "v1";
  doc["n"] = d.n();
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : d.metadata) doc["metadata"][k] = v;
  doc["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : d.variables()) {
    doc["variables"].push_back({{"name", v.name}, {"levels", v.levels}, {"allows_missing", v.allows_missing}});
  }
  // Columns are written one per line so large files stay diff-able.
  std::string out = doc.dump(2);
  out.pop_back();  // closing brace
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  out += ",\n  \"columns\": {";
  for (std::size_t v = 0; v < d.num_variables(); ++v) {
    out += v == 0 ? "\n" : ",\n";
    out += "    " + nlohmann::json(d.variable(v).name).dump() + ": [";
    const auto col = d.column(v);
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (r) out += ',';
      out += std::to_string(col[r]);
    }
    out += "]";
  }
  out += "\n  }\n}\n";
  return out;
}

DiscreteDataset parse_dataset_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "pns-dataset") throw Error(Errc::MalformedDataset, "not a pns-dataset document");
    if (doc.value("version", "") != "v1") throw Error(Errc::MalformedDataset, "unsupported dataset version");
    std::vector<DiscreteVariable> vars;
    std::vector<std::vector<int>> cols;
    for (const auto& v : doc.at("variables")) {
      DiscreteVariable var;
      var.name = v.at("name").get<std::string>();
      var.levels = v.at("levels").get<std::vector<int>>();
      var.allows_missing = v.value("allows_missing", false);
      cols.push_back(doc.at("columns").at(var.name).get<std::vector<int>>());
      vars.push_back(std::move(var));
    }
    DiscreteDataset d(std::move(vars), std::move(cols));
    if (doc.contains("n") && doc.at("n").get<std::size_t>() != d.n()) {
      throw Error(Errc::MalformedDataset, "header row count disagrees with column length");
    }
    if (doc.contains("metadata")) {
      for (const auto& [k, v] : doc.at("metadata").items()) d.metadata[k] = v.get<std::string>();
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedDataset, e.what());
  }
}

DiscreteDataset parse_dataset_csv(std::string_view text) {
  const RawTable raw = parse_csv(text);
  std::vector<DiscreteVariable> vars;
  std::vector<std::vector<int>> cols(raw.schema.size());
  for (std::size_t c = 0; c < raw.schema.size(); ++c) {
    DiscreteVariable var;
    var.name = raw.schema[c].name;
    std::set<int> levels;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const Cell& cell = raw.rows[r][c];
      if (is_missing(cell)) {
        var.allows_missing = true;
        cols[c].push_back(kMissingLevel);
        continue;
      }
      const double* v = std::get_if<double>(&cell);
      if (!v || *v != std::floor(*v) || *v < 0 || *v > 1e9) {
        throw Error(Errc::MalformedDataset, "column '" + var.name + "' row " + std::to_string(r + 1) +
                                                " is not a non-negative integer level");
      }
      const int level = static_cast<int>(*v);
      levels.insert(level);
      cols[c].push_back(level);
    }
    var.levels.assign(levels.begin(), levels.end());
    vars.push_back(std::move(var));
  }
  return DiscreteDataset(std::move(vars), std::move(cols));
}

DiscreteDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_dataset_json(text);
  return parse_dataset_csv(text);
}

void write_dataset(const DiscreteDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << write_dataset_json(d);
}

}  // namespace pnskit
