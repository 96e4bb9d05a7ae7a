#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctrtab/data/table.hpp"

namespace ctrtab::data {

// RFC-4180 style reader/writer. A header row is required; it must name every
// schema column (any order) and nothing else. Empty cells are missing values.
RawTable read_csv(std::istream& in, const TableSchema& schema);
RawTable load_csv(const std::filesystem::path& path, const TableSchema& schema);

// Numbers are written in shortest round-trip form, so write-then-read is exact.
void write_csv(std::ostream& out, const RawTable& table);
void save_csv(const std::filesystem::path& path, const RawTable& table);

// Splits one CSV record; exposed for tests.
std::vector<std::string> split_csv_record(std::istream& in, bool& ok);

std::string format_double(double v);

}  // namespace ctrtab::data
