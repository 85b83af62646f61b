#include "pnskit/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pnskit/error.hpp"

namespace pnskit {

namespace {

Cell to_cell(const std::string& field, bool quoted) {
  if (field.empty()) return std::monostate{};
  if (!quoted) {
    double v = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec == std::errc{} && ptr == end) return v;
  }
  return field;
}

}  // namespace

RawTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  // Split into records of (field, was-quoted) pairs.
  std::vector<std::vector<std::pair<std::string, bool>>> records;
  std::vector<std::pair<std::string, bool>> current;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;

  auto end_field = [&] {
    current.emplace_back(std::move(field), quoted);
    field.clear();
    quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // A record holding one empty unquoted field is a blank line.
    if (!(current.size() == 1 && current[0].first.empty() && !current[0].second)) {
      records.push_back(std::move(current));
    }
    current.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field += c;
    }
  }
  if (any || !field.empty() || !current.empty()) end_record();

  if (records.empty()) throw Error(Errc::EmptyHeader, "input has no header row");

  RawTable out;
  for (auto& [name, q] : records.front()) {
    if (name.empty()) throw Error(Errc::EmptyHeader, "header has an empty column name");
    VariableSchema s;
    s.name = name;
    out.schema.push_back(std::move(s));
  }

  std::vector<bool> text_seen(out.schema.size(), false);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != out.schema.size()) {
      throw Error(Errc::RaggedRow, "record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                                       " fields, header has " + std::to_string(out.schema.size()));
    }
    std::vector<Cell> row;
    row.reserve(records[r].size());
    for (std::size_t c = 0; c < records[r].size(); ++c) {
      row.push_back(to_cell(records[r][c].first, records[r][c].second));
      if (std::holds_alternative<std::string>(row.back())) text_seen[c] = true;
    }
    out.rows.push_back(std::move(row));
  }
  for (std::size_t c = 0; c < out.schema.size(); ++c) {
    if (text_seen[c]) out.schema[c].kind = VariableKind::Text;
  }
  return out;
}

RawTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace pnskit
