#pragma once

#include <filesystem>
#include <string_view>

#include "pnskit/raw_table.hpp"

namespace pnskit {

// RFC 4180 style CSV with a mandatory header row. Quoted fields may contain
// commas, newlines and doubled quotes. Empty cells are missing; cells that
// parse completely as numbers are numeric, everything else is text.
//
// Throws EmptyHeader and RaggedRow (with the 1-based record number).
RawTable parse_csv(std::string_view text);

RawTable read_csv_file(const std::filesystem::path& path);

}  // namespace pnskit
