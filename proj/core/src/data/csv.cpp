#include "ctrtab/data/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ctrtab/error.hpp"

namespace ctrtab::data {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

bool needs_quotes(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_record(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool quoted = false;
  bool any = false;
  ok = false;
  for (int ci = in.get(); ci != std::char_traits<char>::eof(); ci = in.get()) {
    any = true;
    const char ch = static_cast<char>(ci);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && trim(field).empty()) {
      in_quotes = true;
      quoted = true;
      field.clear();
    } else if (ch == ',') {
      fields.push_back(quoted ? field : trim(field));
      field.clear();
      quoted = false;
    } else if (ch == '\n') {
      fields.push_back(quoted ? field : trim(field));
      ok = true;
      return fields;
    } else if (ch == '\r' && !quoted) {
      // swallowed; CRLF line endings
    } else if (!quoted) {
      field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (any) {
    fields.push_back(quoted ? field : trim(field));
    ok = true;
  }
  return fields;
}

RawTable read_csv(std::istream& in, const TableSchema& schema) {
  bool ok = false;
  auto header = split_csv_record(in, ok);
  if (!ok) throw DataError("csv: missing header row");
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0].erase(0, 3);

  // position in file -> schema column
  std::vector<std::size_t> mapping(header.size());
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto idx = schema.find(header[i]);
    if (!idx) throw DataError("csv: unknown column '" + header[i] + "' in header");
    if (seen[*idx]) throw DataError("csv: column '" + header[i] + "' appears twice in header");
    seen[*idx] = true;
    mapping[i] = *idx;
  }
  for (std::size_t c = 0; c < schema.size(); ++c)
    if (!seen[c]) throw DataError("csv: header is missing column '" + schema[c].name + "'");

  RawTable table = RawTable::empty_like(schema);
  std::size_t row = 0;
  for (;;) {
    auto fields = split_csv_record(in, ok);
    if (!ok) break;
    ++row;
    if (fields.size() == 1 && fields[0].empty() && header.size() > 1) continue;  // blank line
    if (fields.size() != header.size()) {
      throw DataError("csv: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::size_t c = mapping[i];
      const std::string& cell = fields[i];
      if (schema[c].kind == ColumnKind::numerical) {
        auto& col = table.numeric(c);
        if (cell.empty()) {
          col.emplace_back(std::nullopt);
          continue;
        }
        double v = 0.0;
        const char* first = cell.data();
        if (*first == '+') ++first;
        auto res = std::from_chars(first, cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw DataError("csv: row " + std::to_string(row) + ", column '" + schema[c].name +
                          "': cannot parse '" + cell + "' as a number");
        }
        col.emplace_back(v);
      } else {
        auto& col = table.categorical(c);
        if (cell.empty()) {
          col.emplace_back(std::nullopt);
        } else {
          col.emplace_back(cell);
        }
      }
    }
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open csv file " + path.string());
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const RawTable& table) {
  table.validate();
  const auto& cols = table.schema.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    write_field(out, cols[c].name);
  }
  out << '\n';
  const std::size_t n = table.rows();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      if (cols[c].kind == ColumnKind::numerical) {
        const auto& v = table.numeric(c)[r];
        if (v) out << format_double(*v);
      } else {
        const auto& v = table.categorical(c)[r];
        if (v) write_field(out, *v);
      }
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const RawTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write csv file " + path.string());
  write_csv(out, table);
}

}  // namespace ctrtab::data
