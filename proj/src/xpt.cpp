#include "pnskit/xpt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string_view>

#include "pnskit/error.hpp"

namespace pnskit {

namespace {

constexpr std::size_t kRecord = 80;

constexpr std::string_view kPrefix = "HEADER RECORD*******";
constexpr std::string_view kLibrary = "HEADER RECORD*******LIBRARY HEADER RECORD!!!!!!!";
constexpr std::string_view kLibraryV8 = "HEADER RECORD*******LIBV8   HEADER RECORD!!!!!!!";
constexpr std::string_view kMember = "HEADER RECORD*******MEMBER  HEADER RECORD!!!!!!!";
constexpr std::string_view kMemberV8 = "HEADER RECORD*******MEMBV8  HEADER RECORD!!!!!!!";
constexpr std::string_view kDescriptor = "HEADER RECORD*******DSCRPTR HEADER RECORD!!!!!!!";
constexpr std::string_view kNamestr = "HEADER RECORD*******NAMESTR HEADER RECORD!!!!!!!";
constexpr std::string_view kObs = "HEADER RECORD*******OBS     HEADER RECORD!!!!!!!";
constexpr std::string_view kLabelV8 = "HEADER RECORD*******LABELV8 HEADER RECORD!!!!!!!";
constexpr std::string_view kLabelV9 = "HEADER RECORD*******LABELV9 HEADER RECORD!!!!!!!";

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t size() const { return bytes_.size(); }

  std::string_view text(std::size_t offset, std::size_t len) const {
    return {reinterpret_cast<const char*>(bytes_.data()) + offset, len};
  }

  // An 80-byte record starting at `offset`; throws TruncatedRecord if short.
  std::string_view record(std::size_t offset, const char* what) const {
    if (offset + kRecord > bytes_.size()) {
      throw Error(Errc::TruncatedRecord,
                  std::string(what) + " record at byte " + std::to_string(offset) + " is cut short (file has " +
                      std::to_string(bytes_.size()) + " bytes)");
    }
    return text(offset, kRecord);
  }

  std::uint16_t u16(std::size_t offset) const {
    return static_cast<std::uint16_t>((bytes_[offset] << 8) | bytes_[offset + 1]);
  }
  std::uint32_t u32(std::size_t offset) const {
    return (std::uint32_t{bytes_[offset]} << 24) | (std::uint32_t{bytes_[offset + 1]} << 16) |
           (std::uint32_t{bytes_[offset + 2]} << 8) | std::uint32_t{bytes_[offset + 3]};
  }
  std::uint8_t at(std::size_t offset) const { return bytes_[offset]; }

 private:
  std::span<const std::uint8_t> bytes_;
};

std::string rtrim(std::string_view s) {
  auto e = s.find_last_not_of(" \0", std::string_view::npos, 2);
  if (e == std::string_view::npos) return {};
  return std::string(s.substr(0, e + 1));
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
  throw Error(Errc::MalformedHeader, what + " at byte " + std::to_string(offset));
}

void expect_header(std::string_view rec, std::string_view expected, std::size_t offset) {
  if (starts_with(rec, expected)) return;
  if (starts_with(rec, kLabelV8) || starts_with(rec, kLabelV9) || starts_with(rec, kMemberV8)) {
    throw Error(Errc::UnsupportedVersion, "transport V8/V9 record at byte " + std::to_string(offset));
  }
  malformed(offset, "expected '" + std::string(expected.substr(kPrefix.size(), 8)) + "' header");
}

struct Field {
  VariableSchema schema;
  bool numeric = true;
  std::size_t length = 0;
  std::size_t position = 0;
};

bool is_missing_numeric(const Reader& r, std::size_t offset, std::size_t len) {
  const std::uint8_t first = r.at(offset);
  const bool marker = first == '.' || first == '_' || (first >= 'A' && first <= 'Z');
  if (!marker) return false;
  for (std::size_t i = 1; i < len; ++i) {
    if (r.at(offset + i) != 0) return false;
  }
  return true;
}

bool all_blank(const Reader& r, std::size_t offset, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (r.at(offset + i) != ' ') return false;
  }
  return true;
}

}  // namespace

double ibm_to_double(std::span<const std::uint8_t, 8> b) {
  std::uint64_t fraction = 0;
  for (std::size_t i = 1; i < 8; ++i) fraction = (fraction << 8) | b[i];
  const bool negative = (b[0] & 0x80) != 0;
  if (fraction == 0) return negative ? -0.0 : 0.0;
  const int exponent = (b[0] & 0x7f) - 64;
  // value = 0.fraction(base 16) * 16^exponent = fraction * 2^(4*exponent - 56)
  const double magnitude = std::ldexp(static_cast<double>(fraction), 4 * exponent - 56);
  return negative ? -magnitude : magnitude;
}

XptMember parse_xpt_member(std::span<const std::uint8_t> bytes) {
  const Reader r(bytes);

  if (r.size() < kRecord) {
    if (r.size() >= kLibrary.size() && starts_with(r.text(0, r.size()), kLibrary)) {
      throw Error(Errc::TruncatedRecord, "library header at byte 0 is cut short");
    }
    malformed(0, "file too short for a library header");
  }
  const auto lib = r.record(0, "library header");
  if (starts_with(lib, kLibraryV8)) throw Error(Errc::UnsupportedVersion, "transport V8/V9 library header at byte 0");
  if (!starts_with(lib, kLibrary)) malformed(0, "missing SAS transport library header");

  const auto first_real = r.record(80, "first real header");
  if (!starts_with(first_real, "SAS     SAS     SASLIB  ")) malformed(80, "bad first real header");
  r.record(160, "second real header");

  std::size_t off = 240;
  const auto member = r.record(off, "member header");
  expect_header(member, kMember, off);
  std::size_t namestr_len = 0;
  try {
    namestr_len = std::stoul(std::string(member.substr(75, 3)));
  } catch (const std::exception&) {
    malformed(off, "unreadable namestr length");
  }
  if (namestr_len != 140 && namestr_len != 136) malformed(off, "unsupported namestr length " + std::to_string(namestr_len));

  off += kRecord;
  expect_header(r.record(off, "descriptor header"), kDescriptor, off);

  off += kRecord;
  const auto desc1 = r.record(off, "member descriptor");
  if (!starts_with(desc1, "SAS     ")) malformed(off, "bad member descriptor");
  XptMember out;
  out.name = rtrim(desc1.substr(8, 8));

  off += kRecord;
  const auto desc2 = r.record(off, "member descriptor");
  out.label = rtrim(desc2.substr(32, 40));

  off += kRecord;
  const auto namestr_header = r.record(off, "namestr header");
  expect_header(namestr_header, kNamestr, off);
  std::size_t nvars = 0;
  try {
    nvars = std::stoul(std::string(namestr_header.substr(54, 4)));
  } catch (const std::exception&) {
    malformed(off, "unreadable variable count");
  }

  off += kRecord;
  const std::size_t namestr_bytes = nvars * namestr_len;
  const std::size_t padded = (namestr_bytes + kRecord - 1) / kRecord * kRecord;
  if (off + namestr_bytes > r.size()) {
    throw Error(Errc::TruncatedRecord, "namestr records at byte " + std::to_string(off) + " are cut short");
  }

  std::vector<Field> fields;
  std::size_t row_length = 0;
  for (std::size_t v = 0; v < nvars; ++v) {
    const std::size_t base = off + v * namestr_len;
    Field f;
    const std::uint16_t type = r.u16(base);
    if (type != 1 && type != 2) malformed(base, "variable type " + std::to_string(type));
    f.numeric = type == 1;
    f.length = r.u16(base + 4);
    f.schema.name = rtrim(r.text(base + 8, 8));
    f.schema.label = rtrim(r.text(base + 16, 40));
    f.schema.kind = f.numeric ? VariableKind::Continuous : VariableKind::Text;
    f.position = r.u32(base + 84);
    if (f.numeric && (f.length < 2 || f.length > 8)) {
      malformed(base, "numeric variable " + f.schema.name + " has length " + std::to_string(f.length));
    }
    if (f.length == 0) malformed(base, "variable " + f.schema.name + " has length 0");
    row_length += f.length;
    fields.push_back(std::move(f));
  }
  for (const auto& f : fields) {
    if (f.position + f.length > row_length) malformed(off, "variable " + f.schema.name + " lies outside the row");
  }

  off += padded;
  const auto obs = r.record(off, "observation header");
  expect_header(obs, kObs, off);
  off += kRecord;

  // The data section runs to the next member header or to end of file.
  std::size_t data_end = r.size();
  for (std::size_t p = off; p + kRecord <= r.size(); p += kRecord) {
    const auto rec = r.text(p, kRecord);
    if (starts_with(rec, kMember) || starts_with(rec, kMemberV8)) {
      data_end = p;
      break;
    }
  }
  const std::size_t data_len = data_end - off;

  for (const auto& f : fields) out.table.schema.push_back(f.schema);
  if (row_length == 0) return out;

  std::size_t nrows = data_len / row_length;
  const std::size_t tail = data_len % row_length;
  if (tail != 0 && !all_blank(r, off + nrows * row_length, tail)) {
    throw Error(Errc::TruncatedRecord, "partial observation at byte " + std::to_string(off + nrows * row_length));
  }
  // Blank rows that start inside the final 80-byte record are padding.
  const std::size_t last_record_start = data_len == 0 ? 0 : (data_len - 1) / kRecord * kRecord;
  while (nrows > 0) {
    const std::size_t start = (nrows - 1) * row_length;
    if (start < last_record_start || !all_blank(r, off + start, row_length)) break;
    --nrows;
  }

  out.table.rows.reserve(nrows);
  for (std::size_t row = 0; row < nrows; ++row) {
    const std::size_t base = off + row * row_length;
    std::vector<Cell> cells;
    cells.reserve(fields.size());
    for (const auto& f : fields) {
      const std::size_t p = base + f.position;
      if (f.numeric) {
        if (is_missing_numeric(r, p, f.length)) {
          cells.emplace_back(std::monostate{});
          continue;
        }
        std::array<std::uint8_t, 8> buf{};
        for (std::size_t i = 0; i < f.length; ++i) buf[i] = r.at(p + i);
        cells.emplace_back(ibm_to_double(buf));
      } else {
        std::string s = rtrim(r.text(p, f.length));
        if (s.empty()) {
          cells.emplace_back(std::monostate{});
        } else {
          cells.emplace_back(std::move(s));
        }
      }
    }
    out.table.rows.push_back(std::move(cells));
  }
  return out;
}

RawTable parse_xpt(std::span<const std::uint8_t> bytes) { return parse_xpt_member(bytes).table; }

RawTable read_xpt_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_xpt(bytes);
}

}  // namespace pnskit
