#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "pnskit/raw_table.hpp"

namespace pnskit {

// Decodes an 8-byte IBM System/360 hexadecimal float (big-endian) into
// binary64. Every IBM value whose 56-bit fraction needs at most 53
// significant bits converts exactly.
double ibm_to_double(std::span<const std::uint8_t, 8> bytes);

struct XptMember {
  std::string name;
  std::string label;
  RawTable table;
};

// Parses a SAS Transport V5 file and returns its first member. Numeric SAS
// missing values ('.', '.A'-'.Z', '._') become empty cells; character fields
// are right-trimmed and blank fields become empty cells.
//
// Errors (each names the byte offset): MalformedHeader, UnsupportedVersion
// (V8/V9 transport), TruncatedRecord.
RawTable parse_xpt(std::span<const std::uint8_t> bytes);
XptMember parse_xpt_member(std::span<const std::uint8_t> bytes);

RawTable read_xpt_file(const std::filesystem::path& path);

}  // namespace pnskit
