#include "eggroll/harness/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace eggroll::harness {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     int schema_version)
    : out_(path, std::ios::binary), n_columns_(columns.size()) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
  out_ << "# schema_version=" << schema_version << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 == columns.size() ? "\n" : ",");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw std::logic_error("csv: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

}  // namespace eggroll::harness
